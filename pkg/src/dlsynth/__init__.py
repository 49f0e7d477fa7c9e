"""dlsynth: input synthesis for stratified Datalog programs.

Given a stratified Datalog program and a first-order constraint over its
fixed point, dlsynth searches for an input (a set of edb facts) whose
stratified model satisfies the constraint. The network subpackage applies
this to synthesizing router configurations (link weights, static routes,
route preferences) from forwarding requirements.
"""

__version__ = "0.1.0"

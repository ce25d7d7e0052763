"""xferlab: desk-scale lab for visual transfer of pixel policies.

Train an actor-critic agent on a source game, show that it breaks under
visual variants, restore it with a cycle-consistent frame translator selected
by task score, and surpass it by imitation learning from the imperfect
transferred policy.
"""

__version__ = "0.1.0"

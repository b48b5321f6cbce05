"""Named extremal operators used as reference cases.

Greek tuples follow pair order: (alpha,) for m=2; (alpha, beta, gamma) for
pairs (1,2), (1,3), (2,3); (alpha, beta, gamma, delta, epsilon, lambda) for
(1,2), (1,3), (1,4), (2,3), (2,4), (3,4). A 1 means the first genotype of the
pair dominates.
"""

from .volterra import ExtremalVolterra


def two_genotype(alpha: int) -> ExtremalVolterra:
    return ExtremalVolterra.from_params((alpha,))


def three_genotype(alpha: int, beta: int, gamma: int) -> ExtremalVolterra:
    return ExtremalVolterra.from_params((alpha, beta, gamma))


def four_genotype(alpha, beta, gamma, delta, epsilon, lam) -> ExtremalVolterra:
    return ExtremalVolterra.from_params((alpha, beta, gamma, delta, epsilon, lam))


# 1 > 2 > 3 > 1, the cyclic three-genotype operator (Zakharevich's example)
ZAKHAREVICH = three_genotype(1, 0, 1)
# its mirror image 1 > 3 > 2 > 1
ZAKHAREVICH_MIRROR = three_genotype(0, 1, 0)
# linear order 3 > 2 > 1
LINEAR_3 = three_genotype(0, 0, 0)

# Hamiltonian cycle 1 > 2 > 3 > 4 > 1
HAMILTONIAN_4 = four_genotype(1, 1, 0, 1, 1, 1)
# 1 dominates all; 2 > 3 > 4 > 2
SINK_CYCLE_4 = four_genotype(1, 1, 1, 1, 0, 1)
# 3 dominated by all; 1 > 2 > 4 > 1
SOURCE_CYCLE_4 = four_genotype(1, 1, 0, 1, 1, 0)
# linear order 1 > 2 > 3 > 4
LINEAR_4 = four_genotype(1, 1, 1, 1, 1, 1)

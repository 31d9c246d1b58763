"""Evolution operators for linear non-autonomous equations whose generators have central commutators."""
from .commutators import (
    CommutatorField,
    antisymmetry_check,
    commutation_pass_check,
    correction_integral_S,
    multiplicity_alpha,
    phase_integral,
)
from .evolution import (
    GeneratorFamily,
    Partition,
    UniformPartition,
    build_dyadic_partition,
    cocycle_residual,
    convergence_order,
    dyadic_partition,
    product_approximant,
    refine_to_convergence,
)
from .kernels import IMPLEMENTATION as KERNEL_IMPLEMENTATION
from .magnus import closed_form_propagator, formula_vs_limit, zassenhaus_check
from .nilpotent import NilpotentFamily, extract_commutators, nilpotent_exp, ode_oracle

__version__ = "0.1.0"

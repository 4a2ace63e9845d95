"""Topological invariants of SU(2) spinor and gauge field configurations.

The package decomposes gauge potentials through spinors, evaluates
Chern-Simons and Chern densities by independent routes, and cross-checks
volume quadrature against the ledger of isolated zeros of the associated
4-vector field (Brouwer degrees times Hopf indices).
"""

from .conventions import ORIENTATION_SIGN
from .errors import (BadMagicError, ChecksumError, CountMismatchError,
                     DegreeResolutionError, FieldError, FieldFormatError,
                     HeaderError, LatticeError, NormalizationError,
                     ReconstructionError, Su2TopoError, ZeroLocationError)
from .lattice import (Grid, ScalarField, central_diff, derivative_stack,
                      integrate, integrate_values, interpolate)
from .su2_algebra import (GENERATORS, IDENTITY2, SIGMA, clifford_decompose,
                          clifford_reconstruct, self_check)
from .fields import (GaugeField, MField, PhiField, SpinorField, SU2Field,
                     UnitField, face_restrict, gauge_transform, normalize,
                     norm_squared, phi_to_spinor, pure_gauge_potential,
                     sigma_model_field, spinor_to_phi, su2_dagger,
                     su2_product, unit_vector)
from .decomposition import (Decomposition, covariant_derivative, decompose,
                            parallel_gauge_potential)
from .chern_simons import (AbelianData, CSDensity, cs_density, fn_data,
                           fn_pointwise, knot_charge, trace_pointwise)
from .chern_density import (C2Result, ChernDensity, FieldStrength,
                            boundary_cs_sum, chern_charge_pair, chern_density,
                            exclusion_mask, field_strength, second_chern_number,
                            spinor_chern_values, unit_chern_values,
                            unit_chern_values_literal)
from .phi_mapping import (Ledger, LedgerAnalysis, ZeroPoint, ZeroSearch,
                          analyze, charge_ledger, jacobian, local_degree,
                          locate_zeros, surface_degree)
from .generators import (AnalyticConfig, box_grid, identity_map_s3,
                         linear_phi_field, quaternion_polynomial_field,
                         quaternion_power_field, random_config, s3_chart_grid,
                         s3_unit_vectors)
from .fldio import read_field, write_field
from .report import ChargeReport, __version__

__all__ = [name for name in dir() if not name.startswith("_")]

"""Bitmasked expander codes with sublinear-time decoding, and bitmasked group testing."""
from .bitmask import (BitLayout, SparseVector, Syndrome, bin_bit, full_syndrome_of_dense,
                      rate_lower_bound, seed_slice, subtract_sparse_from_syndrome, syndrome_of_sparse)
from .decoder import (DecodeFailed, DecodeReport, DecoderParams, ExpansionViolated, approximate,
                      decode_full, decode_syndrome, estimate_det, estimate_rand, good_seed_det,
                      good_seed_rand)
from .expander import (ExpanderParams, HashedExpander, LayeredExpander, audit_expansion_montecarlo,
                       sample_expander, verify_expansion_bruteforce)
from .field import GF2, FieldElement, PrimeField, field_from_tag
from .group_testing import (DisjunctMatrix, GroupTestScheme, OutcomeVector, outcomes, recover,
                            remove_false_positives, sample_disjunct, superset, verify_disjunct_bruteforce)
from .kernels import BACKEND

__version__ = "0.1.0"

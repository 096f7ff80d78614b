"""Random periodic sampling for shift-invariant and multi-band Paley-Wiener spaces."""

from .generators import (AnalyticIndicator, GeneratorSet, RasterProfile, constant_C, constant_K,
                         orthonormality_check, zak_profile)
from .spectrum import (BoundaryGeometry, MultiTileSpectrum, RasterSpectrum, TilingDecomposition,
                       complete_to_multitile, fingerprints, k_level, offsets_union, rho_and_cover,
                       tiling_decomposition)
from .verify import (FrameReport, GridPolicy, SamplingPattern, bernstein_tail, gram_T,
                     multitile_fast_T, net_resolution, sample_count_general, sample_count_ktile,
                     sample_count_thm1, verify_frame, zak_matrix)

__version__ = "0.1.0"

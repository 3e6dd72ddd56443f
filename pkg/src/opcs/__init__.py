"""Origami pattern construction for single-pixel compressive imaging.

The package builds deterministic +/-1 modulation patterns by symmetric
reverse folding and half-scale mirror embedding, simulates bucket-detector
measurements, and reconstructs images with ghost-imaging correlations or a
total-variation compressed-sensing solver.
"""

from opcs.basis import (
    Axis,
    BaselineKind,
    MeasurementMatrix,
    PatternBasis,
    SwapMode,
    downscale_half,
    embed_mirror,
    flatten,
    fold,
    generate_baseline,
    generate_origami,
    swap_id_set,
)
from opcs.connectivity import CdProfile, cd_profile, count_cd, count_cd_oracle
from opcs.errors import OpcsError
from opcs.forward import (
    BucketSeries,
    ComplementaryPair,
    MeasureMode,
    NoiseMode,
    NoiseSpec,
    measure_series,
    split_complementary,
)
from opcs.imagery import load_pgm, save_pgm, shepp_logan
from opcs.metrics import pearson, psnr, rmse
from opcs.recon import (
    CiSelection,
    ReconResult,
    TvSolverConfig,
    reconstruct_ci,
    reconstruct_dgi,
    reconstruct_gi,
    reconstruct_tv,
)

__version__ = "0.1.0"

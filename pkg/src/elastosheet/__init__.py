"""Normal-mode stability analysis of planar compressible elastic vortex sheets."""
from .core_state import (FixedSoundSpeed, FrozenCoefficients, Frequency, GammaLaw, PlanarBackground,
                         check_involution, check_nonparallel, frozen_from_background, hemisphere_point,
                         projections, sound_speed)
from .errors import (DegenerateAxisError, DegenerateLiftError, DegenerateTransformationError, DomainError,
                     FactoredFormUnavailable, InconsistentTraceError, PoleProximity, RootCountAnomaly,
                     SheetError)

__version__ = "0.1.0"

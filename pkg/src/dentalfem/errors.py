"""Exception hierarchy shared by all dentalfem modules."""


class DentalFemError(Exception):
    """Base class for all errors raised by this package."""


# --- volume / NIfTI ---------------------------------------------------------

class NiftiFormatError(DentalFemError):
    """Malformed NIfTI-1 header (wrong sizeof_hdr, magic, or field values)."""


class UnsupportedDataTypeError(NiftiFormatError):
    """NIfTI datatype code this reader does not decode."""


class TruncatedDataError(NiftiFormatError):
    """Voxel payload shorter than the header promises."""


class OrientationError(NiftiFormatError):
    """Volume orientation is not axis-aligned; the pipeline requires it."""


class VolumeBoundsError(DentalFemError):
    """Region of interest or slice index outside the voxel grid."""


class EmptyInputError(DentalFemError):
    """Operation received an empty volume or empty selection."""


# --- segmentation -----------------------------------------------------------

class DimensionError(DentalFemError):
    """Volume too small along some axis for the requested stencil."""


class MarkerError(DentalFemError):
    """Marker set unusable (missing internal/external marker, bad id)."""


class MarkerPlacementError(MarkerError):
    """Marker voxel outside the volume or on background."""


class CutAssignmentError(DentalFemError):
    """Dentition cutting produced an ambiguous or incomplete tooth assignment."""


# --- geometry / meshing -----------------------------------------------------

class ParameterError(DentalFemError):
    """Scalar parameter outside its documented range."""


class SubdomainReferenceError(DentalFemError):
    """A named subdomain, tooth, or load patch does not exist."""


class EmptyDomainError(DentalFemError):
    """No labeled voxels to mesh."""


class MeshConformityError(DentalFemError):
    """Facet incidence audit failed (interior != 2 or boundary != 1)."""


class ElementQualityError(DentalFemError):
    """Degenerate (non-positive volume) tetrahedron."""


class SingularSetupError(DentalFemError):
    """No fixed boundary: the stiffness matrix would be singular."""


# --- elasticity -------------------------------------------------------------

class NearIncompressibleError(ParameterError):
    """Poisson ratio too close to 0.5 for linear tetrahedra (locking)."""


class ConfigurationError(DentalFemError):
    """Missing or inconsistent material/load configuration."""


class ConvergenceError(DentalFemError):
    """Iterative solver did not reach the requested tolerance.

    Carries the residual history so callers can diagnose the stall.
    """

    def __init__(self, message, residual_history=None):
        super().__init__(message)
        self.residual_history = list(residual_history or [])


class NonSpdError(DentalFemError):
    """Negative curvature encountered: system is not positive definite."""


# --- case service -----------------------------------------------------------

class SequencingError(DentalFemError):
    """Pipeline stage requested before its prerequisite stage completed."""


class CaseBusyError(DentalFemError):
    """A job is already running for this case."""


class CaseNotFoundError(DentalFemError):
    """Unknown case, variant, or job id."""

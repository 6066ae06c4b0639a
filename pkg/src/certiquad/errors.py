"""Exception types shared across the package."""


class CertiquadError(Exception):
    """Base class for package-specific errors."""


class ShapeError(CertiquadError, ValueError):
    """Array dimensions do not chain consistently."""


class DomainError(CertiquadError, ValueError):
    """Input values outside the supported domain (non-finite entries, wrong sign)."""


class UnsupportedOrderError(CertiquadError, ValueError):
    """Requested derivative order exceeds what the activation or depth supports."""


class CapabilityError(CertiquadError, ValueError):
    """Network shape cannot support the requested computation."""


class GridMismatchError(CertiquadError, ValueError):
    """Requested cell size does not tile the domain exactly."""

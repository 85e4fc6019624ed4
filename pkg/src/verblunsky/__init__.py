"""Block Toeplitz and block Hankel matrices, their Dirac and canonical systems,
and the Verblunsky-type coefficients that parametrize them.
"""
from .errors import (
    PreconditionError,
    ReconstructionError,
    VerblunskyError,
)
from .hankel_canonical import (
    CanonicalSystem,
    GammaSeq,
    HankelSpec,
    OmegaSeq,
    assemble_hankel,
    fundamental_Y,
    hamiltonian_from_hankel,
    hamiltonian_from_omega,
    hankel_from_omega,
    measure_to_hankel,
    omega_from_gamma,
    omega_from_hankel,
    reconstruct_hankel,
    spectral_transform_V,
    transfer_wA_hankel,
)
from .measure import DiscreteMeasure
from .moment_lft import (
    RationalHerglotz,
    extract_measure,
    frakA,
    lft_phi,
    representing_measure,
    verify_appendix,
    verify_moments,
)
from .toeplitz_dirac import (
    DiracSystem,
    ToeplitzSpec,
    VerblunskySeqT,
    assemble_toeplitz,
    dirac_from_toeplitz,
    reconstruct_toeplitz,
    toeplitz_from_verblunsky,
    transfer_wA_toeplitz,
    verblunsky_from_toeplitz,
    weyl_eval,
    weyl_series,
)

__version__ = "0.1.0"

"""mmcavity: a workbench for seamless evanescent-tube mm-wave cavities.

Subpackages and modules:
    geometry    intersecting-tube geometries, cutoff formulas, presets
    modesolver  Yee-grid curl-curl eigenmodes, mode volumes, Slater tuning
    resonfit    one-port S11 lineshape model, fitting, photon numbers
    cryo        thermal occupation, Mattis-Bardeen Qi(T), frequency shifts
    duffing     driven nonlinear steady state and metastable-state model
    hybridqed   Rydberg hybrid cavity-QED figures of merit and EIT spectra
    cli         command-line front end and sweep orchestration
"""

from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]

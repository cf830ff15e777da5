"""bictrap: lattice waveguide-QED simulation of single-photon trapping in
bound states in the continuum via multi-photon scattering with delayed
feedback."""

from .basis import SectorBasis, enumerate_basis, symmetrized_amplitude_view
from .bic import BicState, bic_decay_rate, bic_for_model, single_qubit_bic, two_qubit_bic
from .hamiltonian import SparseHamiltonian, build_sector_hamiltonian
from .model import (
    Boundary,
    EmitterKind,
    EmitterSpec,
    ModelSpec,
    ParamMap,
    from_paper_params,
)
from .observables import (
    ObservableSeries,
    RegionSpec,
    bic_projection,
    check_trapping_identity,
    concurrence,
    field_intensity,
    qubit_population,
    trapped_photon_prob,
    two_photon_density,
)
from .propagate import EvolutionPlan, evolve, expm_dense_oracle
from .states import (
    CoherentSpec,
    CoherentState,
    ExponentialFront,
    GaussianPacket,
    StateVector,
    coherent_truncated,
    single_photon,
    time_reverse,
    two_photon_product,
)

__version__ = "0.1.0"

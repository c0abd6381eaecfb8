"""Two-copy Bell sampling of Pauli weight distributions.

Pure-state simulation of Pauli expectation sampling: dense outcome
distributions, Bell-basis two-copy measurement, marginal estimation,
adapted ancestral sampling, and two-party overlap protocols over a
classical channel, plus the experiment CLI built on top.
"""

from .bell import (
    BellDataset,
    DatasetTooSmallError,
    MarginalEstimator,
    bell_probabilities,
    bell_sample,
    eigenvalue_tables,
)
from .clifford import CliffordElement, random_clifford, single_qubit_cliffords
from .config import (
    ConfigError,
    ExperimentConfig,
    ResultRow,
    SchemaError,
    SummaryRow,
    csv_signature,
    load_config,
    read_csv,
    save_config,
    write_csv,
)
from .lemmas import LemmaResult, run_all_checks
from .paulis import (
    MAX_DENSE_QUBITS,
    PauliDistribution,
    PauliString,
    PureState,
    QubitOrdering,
    entropy_report,
    exact_marginal,
    expectation,
    imaginarity,
    pauli_distribution,
    renyi_entropy,
    schmidt_rank,
    transpose_sign,
    weight_cdf,
)
from .protocols import (
    ClassicalChannel,
    Party,
    ProtocolResult,
    agreement_score,
    estimate_imaginarity_from_samples,
    floor_magnitude,
    imaginarity_sample_count,
    run_asymmetric,
    run_imaginarity,
    run_symmetric,
)
from .sampler import (
    ExactMarginalOracle,
    PathEntanglementReport,
    SamplerDiagnostics,
    adapted_ancestral_sample,
    bell_difference_sample,
    exact_pauli_sample,
    greedy_ordering_exact,
    greedy_ordering_from_dataset,
    induced_distribution,
    path_entanglement,
    tv_error_bound,
    unsafe_mass,
)
from .states import (
    PauliNoiseChannel,
    StateRecipe,
    build_state,
    make_bell_pairs,
    make_cluster2d,
    make_phi_tau,
    make_product,
    make_subset_phase,
    make_t_doped,
    make_tilted,
    sample_noisy_copy,
)

__version__ = "0.1.0"

"""Exact inference on belief diagrams by evidence absorption and reversal."""

from .errors import *  # noqa: F401,F403
from .generate import random_diagram, random_evidence
from .marginals import PosteriorReport, posterior_marginals, propagate_probabilities, prune_barren
from .model import (
    BeliefDiagram,
    Diagnostic,
    EvidenceAssertion,
    NodeRecord,
    PotentialTable,
    TopologyClass,
    classify_topology,
    has_directed_path,
    ordered_list,
    validate_diagram,
)
from .netio import (
    NetworkDocument,
    build_diagram,
    export_dot,
    parse_evidence,
    parse_network,
    read_network,
    write_network,
)
from .oracle import JointTable, condition_joint, enumerate_joint, marginal_from_joint, oracle_marginals
from .scheduler import (
    PriorityQueueState,
    PropagationMessage,
    run_batch,
    run_message_passing,
    run_priority,
    scheduler_step,
)
from .transform import (
    ReversalFrame,
    TransformTrace,
    absorb_all,
    absorb_evidence,
    evidence_reverse,
    propagate_all_evidence,
    propagate_evidence,
)

__version__ = "0.1.0"

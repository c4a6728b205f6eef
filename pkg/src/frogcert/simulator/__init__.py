"""Monte Carlo and exact-enumeration engines for the frog model variants."""

from .boxmodel import FiniteDistribution, enumerate_box_model, pgf_exact, pgf_handle, pgf_of
from .config import VARIANTS, ModelConfig
from .episodes import (
    CoupledEpisode,
    EpisodeOutcome,
    batch_summary,
    erasure_indices,
    outcomes_to_csv,
    run_batch,
    run_coupled_batch,
    run_coupled_episode,
    run_episode,
)
from .tree import ROOT, NodeAddress, neighbors
from .walks import estimate_hit_prob, estimate_phi_transitions, loop_erase, phi_step_after_down, simulate_upsilon

__all__ = [
    "CoupledEpisode",
    "EpisodeOutcome",
    "FiniteDistribution",
    "ModelConfig",
    "NodeAddress",
    "ROOT",
    "VARIANTS",
    "batch_summary",
    "enumerate_box_model",
    "erasure_indices",
    "estimate_hit_prob",
    "estimate_phi_transitions",
    "loop_erase",
    "neighbors",
    "outcomes_to_csv",
    "pgf_exact",
    "pgf_handle",
    "pgf_of",
    "phi_step_after_down",
    "run_batch",
    "run_coupled_batch",
    "run_coupled_episode",
    "run_episode",
    "simulate_upsilon",
]

"""QUBO support vector machines solved by simulated Rydberg annealing or classical samplers."""

from ._qsvm import (
    CapacityError,
    ContractError,
    DataError,
    QuboSvm,
    anneal_register,
    balance,
    brute_force,
    build_qubo,
    complexity_probe,
    decode_alphas,
    embed,
    energy,
    interaction_matrix,
    metrics,
    roster,
    run_experiment,
    sim_anneal,
    solve_qubo,
    synth_fraud,
)

__all__ = [
    "CapacityError",
    "ContractError",
    "DataError",
    "QuboSvm",
    "anneal_register",
    "balance",
    "brute_force",
    "build_qubo",
    "complexity_probe",
    "decode_alphas",
    "embed",
    "energy",
    "interaction_matrix",
    "metrics",
    "roster",
    "run_experiment",
    "sim_anneal",
    "solve_qubo",
    "synth_fraud",
]

"""Graph topology inference from spectrally sparse graph signals.

Pipeline: learn an orthonormal eigenbasis from observations by alternating
sparse coding and Procrustes updates (:mod:`specgl.learn`), then recover an
adjacency matrix from that basis by LP feasibility (:mod:`specgl.recover`).
"""

from .errors import (ConfigError, DegenerateGraph, FailedConvergence, NumericalFailure,
                     SpecGLError, ValidityViolation, ZeroSignal)
from .graph import (Graph, adjacency_of, eig_sym, gft, igft, laplacian_of, read_edge_list,
                    read_matrix, total_variation, write_edge_list, write_matrix)
from .learn import (LearnConfig, LearnResult, estimate_sparsity, learn_eigenbasis,
                    procrustes_update, pseudo_error, sparse_code, topk_project)
from .metrics import EdgeScore, TrialRecord, aggregate, f_measure
from .recover import (AdjacencyLP, RecoveredAdjacency, Status, assemble_adjacency, binarize,
                      build_adjacency_lp, recover_adjacency, solve_feasibility)
from .synth import (GroundTruth, SignalGenConfig, gen_ba_graph, gen_er_graph, gen_rbf_graph,
                    gen_signals, ground_truth)

__version__ = "0.1.0"

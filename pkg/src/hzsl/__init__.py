"""Hierarchical zero-shot classification over semantic label trees.

The toolkit couples label attribute vectors with an "is-a" label tree: a
conditional random field places probability on every root-to-node path,
lifted prediction projects any base zero-shot scorer to a requested level,
and utility rules score predictions by tree proximity. See the README for
the CLI pipeline.
"""

from . import kernels
from .attributes import AttributeTable, cosine_similarity, load_embeddings, save_embeddings
from .crf import (ClassFeatureBundle, CrfGradient, CrfParameters, PathDistribution,
                  compute_features, init_crf, nll, nll_gradient, path_distribution,
                  path_energies, predict_free, predict_max_utility, predict_paths,
                  predict_restricted, predict_within_level, subtree_mass, train_crf)
from .dataio import (Dataset, Instance, SynthConfig, emit_dataset, load_dataset,
                     load_dataset_dir, split_candidates, synth_generate)
from .hierarchy import (LabelHierarchy, WeightedDigraph, build_from_edges,
                        max_arborescence, prune_to_support, random_hierarchy)
from .lifted import (ConseScorer, CrfScorer, DeviseScorer, direct_within_level,
                     lift_predict)
from .utility import (UtilitySpec, expected_utility, mean_utility, u_path_length,
                      u_subtree_depth)
from .zsl import (CompatModel, ConseConfig, SoftmaxHead, TrainConfig,
                  compat_log_scores, conse_embed, conse_predict, devise_predict,
                  init_compat, init_softmax_head, train_compat, train_softmax_head)

__version__ = "0.1.0"

# Copyright 2026 The LCMR Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""LCMR: local and centralized memories for collaborative filtering."""

from ._lcmr import (
    InteractionSet,
    ItemCorpus,
    LcmrConfig,
    LcmrError,
    LcmrModel,
    LooSplit,
    PlantedDataset,
    attend,
    evaluate,
    evaluate_model,
    hr_at_k,
    itempop_scores,
    loo_split,
    make_planted,
    ndcg_at_k,
    rank_of_positive,
    read_history,
    read_split,
    recommend,
    split,
    stable_sigmoid,
    synth,
    train,
)

__all__ = [
    "InteractionSet",
    "ItemCorpus",
    "LcmrConfig",
    "LcmrError",
    "LcmrModel",
    "LooSplit",
    "PlantedDataset",
    "attend",
    "evaluate",
    "evaluate_model",
    "hr_at_k",
    "itempop_scores",
    "loo_split",
    "make_planted",
    "ndcg_at_k",
    "rank_of_positive",
    "read_history",
    "read_split",
    "recommend",
    "split",
    "stable_sigmoid",
    "synth",
    "train",
]

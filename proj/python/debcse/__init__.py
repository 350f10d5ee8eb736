# Copyright 2026 The debcse Authors.
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

"""Python bindings for the debcse core library."""

from ._debcse import (
    DataError,
    alignment,
    candidate_record,
    char_edit_distance,
    edit_distance,
    ipw_negative_probability,
    ipw_positive_probability,
    lexical_overlap,
    load_external_candidates,
    mine_negatives,
    read_embeddings,
    semantic_scores,
    softmax,
    spearman,
    surface_scores,
    tokenize,
    uniformity,
    write_embeddings,
)

__all__ = [
    "DataError",
    "alignment",
    "candidate_record",
    "char_edit_distance",
    "edit_distance",
    "ipw_negative_probability",
    "ipw_positive_probability",
    "lexical_overlap",
    "load_external_candidates",
    "mine_negatives",
    "read_embeddings",
    "semantic_scores",
    "softmax",
    "spearman",
    "surface_scores",
    "tokenize",
    "uniformity",
    "write_embeddings",
]

# Copyright 2026 The GroupScope Authors.
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

"""Social-group appeal detection: lexicon matching, LLM extraction parsing,
embedding-space filtering, salience metrics and panel regressions."""

from ._core import (
    DependencyError,
    GroupscopeError,
    Lexicon,
    ValidationError,
    __version__,
    default_specs,
    esf_fit,
    fit_center,
    fit_ocsvm,
    fit_ols,
    keyness,
    log_likelihood_g2,
    normalize,
    parse_response,
    run_stage,
    score_detection,
    similarity,
    split_sentences,
)

__all__ = [
    "DependencyError",
    "GroupscopeError",
    "Lexicon",
    "ValidationError",
    "__version__",
    "default_specs",
    "esf_fit",
    "fit_center",
    "fit_ocsvm",
    "fit_ols",
    "keyness",
    "log_likelihood_g2",
    "normalize",
    "parse_response",
    "run_stage",
    "score_detection",
    "similarity",
    "split_sentences",
]

# Copyright 2026 The vidaudit Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python bindings for the vidaudit membership auditing toolkit."""

import json as _json

from vidaudit._core import (
    accuracy,
    analytic_drift_auc,
    auc,
    build_feature_vector,
    calibrate_effect,
    cosine,
    generate_features,
    generate_features_csv,
    hashing_embed,
)
from vidaudit._core import run_protocol as _run_protocol

__all__ = [
    "accuracy",
    "analytic_drift_auc",
    "auc",
    "build_feature_vector",
    "calibrate_effect",
    "cosine",
    "generate_features",
    "generate_features_csv",
    "hashing_embed",
    "run_protocol",
]


def run_protocol(feature_csv, classifiers=(), seeds=(), train_fraction=0.7,
                 stratified=True, workers=1):
    """Runs the repeated-split evaluation and returns the report as a dict."""
    return _json.loads(
        _run_protocol(feature_csv, list(classifiers), list(seeds),
                      train_fraction, stratified, workers))

//  Copyright 2026 The chk Authors
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

use thiserror::Error;

/// Errors raised by sketch construction and updates.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SketchError {
    #[error("invalid parameter `{param}`: {reason}")]
    InvalidParameter { param: &'static str, reason: String },

    #[error("memory budget of {budget} bytes is below the minimum of {minimum} bytes")]
    BudgetTooSmall { budget: usize, minimum: usize },

    #[error("weight must be at least 1")]
    ZeroWeight,
}

impl SketchError {
    pub(crate) fn invalid(param: &'static str, reason: impl Into<String>) -> Self {
        SketchError::InvalidParameter {
            param,
            reason: reason.into(),
        }
    }
}

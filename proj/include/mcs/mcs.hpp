// Copyright 2026 The mcs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MCS_MCS_HPP_
#define MCS_MCS_HPP_

#include "mcs/bounds.hpp"
#include "mcs/csv.hpp"
#include "mcs/data_io.hpp"
#include "mcs/error.hpp"
#include "mcs/eval_harness.hpp"
#include "mcs/kernel.hpp"
#include "mcs/llp_model.hpp"
#include "mcs/losses.hpp"
#include "mcs/matching.hpp"
#include "mcs/rng.hpp"
#include "mcs/solver.hpp"
#include "mcs/weighting.hpp"

#endif  // MCS_MCS_HPP_

// include/ctc_collapse/ctc_collapse.hpp

// Copyright 2026 The ctc-collapse Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CTC_COLLAPSE_CTC_COLLAPSE_HPP_
#define CTC_COLLAPSE_CTC_COLLAPSE_HPP_

#include "ctc_collapse/bench.hpp"
#include "ctc_collapse/beam_search.hpp"
#include "ctc_collapse/collapse.hpp"
#include "ctc_collapse/emissions.hpp"
#include "ctc_collapse/greedy.hpp"
#include "ctc_collapse/lm_ngram.hpp"
#include "ctc_collapse/log_math.hpp"
#include "ctc_collapse/oracle.hpp"
#include "ctc_collapse/synth.hpp"

#endif  // CTC_COLLAPSE_CTC_COLLAPSE_HPP_

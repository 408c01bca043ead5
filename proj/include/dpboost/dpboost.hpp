// Copyright 2026 The dpboost Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header.

#pragma once

#include "dpboost/boosting.hpp"
#include "dpboost/data.hpp"
#include "dpboost/error.hpp"
#include "dpboost/harness.hpp"
#include "dpboost/logreg.hpp"
#include "dpboost/model.hpp"
#include "dpboost/noise.hpp"
#include "dpboost/pate.hpp"
#include "dpboost/rng.hpp"
#include "dpboost/toy.hpp"

// Copyright 2026 The falqon-mst Authors
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

#pragma once

#include "falqon_mst/dataset.hpp"
#include "falqon_mst/diagnostics.hpp"
#include "falqon_mst/experiments.hpp"
#include "falqon_mst/falqon.hpp"
#include "falqon_mst/graph.hpp"
#include "falqon_mst/opf.hpp"
#include "falqon_mst/pubo.hpp"
#include "falqon_mst/rng.hpp"
#include "falqon_mst/statevector.hpp"

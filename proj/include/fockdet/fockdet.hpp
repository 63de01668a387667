// Copyright 2026 The fockdet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "fockdet/error.hpp"
#include "fockdet/fock_core.hpp"
#include "fockdet/superops.hpp"
#include "fockdet/bayes.hpp"
#include "fockdet/statistics.hpp"
#include "fockdet/trajectory.hpp"
#include "fockdet/scenario.hpp"
#include "fockdet/runner.hpp"

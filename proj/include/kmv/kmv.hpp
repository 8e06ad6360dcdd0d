// Copyright 2026 the kmv authors
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

#include "kmv/compression.hpp"
#include "kmv/core.hpp"
#include "kmv/data.hpp"
#include "kmv/dictionary.hpp"
#include "kmv/galerkin.hpp"
#include "kmv/linalg.hpp"
#include "kmv/regression.hpp"
#include "kmv/resdmd.hpp"
#include "kmv/structure.hpp"
#include "kmv/systems.hpp"

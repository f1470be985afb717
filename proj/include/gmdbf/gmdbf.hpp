// SPDX-License-Identifier: Apache-2.0
//
// gmdbf: hybrid beamforming link-level simulation for RIS-assisted mmWave MIMO-OFDM
// Copyright (C) 2026 The gmdbf authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef GMDBF_GMDBF_HPP
#define GMDBF_GMDBF_HPP

#include "beamforming.hpp"
#include "channel.hpp"
#include "codebook.hpp"
#include "factorizations.hpp"
#include "harness.hpp"
#include "link.hpp"
#include "ris.hpp"
#include "types.hpp"

#endif // GMDBF_GMDBF_HPP

// Copyright 2026 The hqp Authors
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

#ifndef HQP_HQP_HPP_
#define HQP_HQP_HPP_

#include "hqp/common.hpp"
#include "hqp/harness.hpp"
#include "hqp/homogenize.hpp"
#include "hqp/iipm.hpp"
#include "hqp/io.hpp"
#include "hqp/linsys.hpp"
#include "hqp/qp_core.hpp"

#endif  // HQP_HQP_HPP_

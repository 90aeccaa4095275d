// Copyright 2026 The cvtool Authors
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

#ifndef CVTOOL_VERIFY_H
#define CVTOOL_VERIFY_H

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cvtool::cli {

struct PropertyResult {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Suite names accepted by run_suite, not counting "all".
const std::vector<std::string>& suite_names();

/// Runs one suite, or every suite for "all". Returns nullopt for an unknown
/// name.
std::optional<std::vector<PropertyResult>> run_suite(std::string_view name);

}  // namespace cvtool::cli

#endif  // CVTOOL_VERIFY_H

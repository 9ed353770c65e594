// Copyright 2026 The rdoae Authors. All Rights Reserved.
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

// Report writers for the command-line tool: JSON, CSV scatters and a minimal
// SVG scatter plot. Every file goes through an ArtifactSet so a failing
// command can remove what it already wrote.

#ifndef RDOAE_TOOLS_REPORT_HPP_
#define RDOAE_TOOLS_REPORT_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rdoae/tensor.hpp"

namespace rdoae::cli {

constexpr std::size_t kScatterCap = 10000;

class ArtifactSet {
 public:
  ArtifactSet() = default;
  ArtifactSet(const ArtifactSet&) = delete;
  ArtifactSet& operator=(const ArtifactSet&) = delete;
  // Removes every registered file unless commit() was called.
  ~ArtifactSet();

  // Registers `path` for cleanup and returns it.
  const std::string& add(const std::string& path);
  void commit() { committed_ = true; }

 private:
  std::vector<std::string> paths_;
  bool committed_ = false;
};

void write_text(ArtifactSet& out, const std::string& path,
                const std::string& text);
void write_json(ArtifactSet& out, const std::string& path,
                const nlohmann::json& j);

// Two-column CSV, at most kScatterCap rows (evenly strided when longer).
void write_scatter_csv(ArtifactSet& out, const std::string& path,
                       const std::string& x_name, const std::string& y_name,
                       const std::vector<double>& x,
                       const std::vector<double>& y);
void write_scatter_svg(ArtifactSet& out, const std::string& path,
                       const std::string& title, const std::string& x_name,
                       const std::string& y_name, const std::vector<double>& x,
                       const std::vector<double>& y);
// Matrix as CSV with an optional header row.
void write_matrix_csv(ArtifactSet& out, const std::string& path,
                      const Tensor& m,
                      const std::vector<std::string>& header = {});

std::string format_double(double v);

}  // namespace rdoae::cli

#endif  // RDOAE_TOOLS_REPORT_HPP_

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

#include "report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rdoae/error.hpp"

namespace rdoae::cli {

ArtifactSet::~ArtifactSet() {
  if (committed_) return;
  for (const auto& p : paths_) {
    std::error_code ec;
    std::filesystem::remove(p, ec);
  }
}

const std::string& ArtifactSet::add(const std::string& path) {
  paths_.push_back(path);
  return paths_.back();
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_text(ArtifactSet& out, const std::string& path,
                const std::string& text) {
  out.add(path);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << text;
  if (!f) throw IoError("write failed for '" + path + "'");
}

void write_json(ArtifactSet& out, const std::string& path,
                const nlohmann::json& j) {
  write_text(out, path, j.dump(2) + "\n");
}

namespace {

std::vector<std::size_t> capped_index(std::size_t n) {
  std::vector<std::size_t> idx;
  if (n <= kScatterCap) {
    for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
  } else {
    for (std::size_t i = 0; i < kScatterCap; ++i) {
      idx.push_back(i * n / kScatterCap);
    }
  }
  return idx;
}

std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

}  // namespace

void write_scatter_csv(ArtifactSet& out, const std::string& path,
                       const std::string& x_name, const std::string& y_name,
                       const std::vector<double>& x,
                       const std::vector<double>& y) {
  if (x.size() != y.size()) throw ShapeError("scatter: length mismatch");
  std::ostringstream s;
  s << x_name << ',' << y_name << '\n';
  for (std::size_t i : capped_index(x.size())) {
    s << format_double(x[i]) << ',' << format_double(y[i]) << '\n';
  }
  write_text(out, path, s.str());
}

void write_scatter_svg(ArtifactSet& out, const std::string& path,
                       const std::string& title, const std::string& x_name,
                       const std::string& y_name, const std::vector<double>& x,
                       const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty()) {
    throw ShapeError("scatter plot: empty or mismatched data");
  }
  const double w = 480, h = 400, ml = 70, mr = 20, mt = 40, mb = 50;
  auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
  auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
  double x0 = *xmin_it, x1 = *xmax_it, y0 = *ymin_it, y1 = *ymax_it;
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) y1 = y0 + 1.0;
  auto px = [&](double v) { return ml + (v - x0) / (x1 - x0) * (w - ml - mr); };
  auto py = [&](double v) { return h - mb - (v - y0) / (y1 - y0) * (h - mt - mb); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
    << "\" height=\"" << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\">"
    << xml_escape(title) << "</text>\n";
  s << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr
    << "\" height=\"" << h - mt - mb
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 12
    << "\" text-anchor=\"middle\">" << xml_escape(x_name) << "</text>\n";
  s << "<text x=\"16\" y=\"" << (mt + h - mb) / 2
    << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (mt + h - mb) / 2 << ")\">" << xml_escape(y_name) << "</text>\n";
  s << "<text x=\"" << ml << "\" y=\"" << h - mb + 16 << "\">"
    << format_double(x0) << "</text>\n";
  s << "<text x=\"" << w - mr << "\" y=\"" << h - mb + 16
    << "\" text-anchor=\"end\">" << format_double(x1) << "</text>\n";
  s << "<text x=\"" << ml - 4 << "\" y=\"" << h - mb
    << "\" text-anchor=\"end\">" << format_double(y0) << "</text>\n";
  s << "<text x=\"" << ml - 4 << "\" y=\"" << mt + 10
    << "\" text-anchor=\"end\">" << format_double(y1) << "</text>\n";
  s << "<g fill=\"steelblue\" fill-opacity=\"0.5\">\n";
  for (std::size_t i : capped_index(x.size())) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"1.5\"/>\n",
                  px(x[i]), py(y[i]));
    s << buf;
  }
  s << "</g>\n</svg>\n";
  write_text(out, path, s.str());
}

void write_matrix_csv(ArtifactSet& out, const std::string& path,
                      const Tensor& m, const std::vector<std::string>& header) {
  std::ostringstream s;
  for (std::size_t c = 0; c < header.size(); ++c) {
    s << (c ? "," : "") << header[c];
  }
  if (!header.empty()) s << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      s << (c ? "," : "") << format_double(m(r, c));
    }
    s << '\n';
  }
  write_text(out, path, s.str());
}

}  // namespace rdoae::cli

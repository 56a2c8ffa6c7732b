// Copyright 2026 The evrmpc Authors
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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "evrmpc/errors.hpp"
#include "evrmpc/simulator.hpp"

namespace evrmpc
{

namespace
{

std::string trim(const std::string & s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string & field, const std::string & where)
{
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(field, &used);
  } catch (const std::exception &) {
    throw DataError("cannot parse number '" + field + "' at " + where);
  }
  if (used != field.size() || !std::isfinite(x)) {
    throw DataError("cannot parse number '" + field + "' at " + where);
  }
  return x;
}

}  // namespace

double DriveCycle::speed(int k) const
{
  if (v.empty()) {
    throw DataError("empty drive cycle");
  }
  if (k < 0) {
    throw std::out_of_range("negative cycle step");
  }
  return v[std::min<std::size_t>(static_cast<std::size_t>(k), v.size() - 1)];
}

std::vector<double> DriveCycle::preview(int k, int N) const
{
  std::vector<double> out(static_cast<std::size_t>(std::max(N, 0)));
  for (int j = 0; j < N; ++j) {
    out[j] = speed(k + j);
  }
  return out;
}

DriveCycle resample_cycle(
  std::span<const double> t, std::span<const double> v, const VehicleParams & p)
{
  if (t.size() != v.size()) {
    throw DataError("time and speed columns differ in length");
  }
  if (t.size() < 2) {
    throw DataError("drive cycle needs at least two samples");
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || !std::isfinite(v[i])) {
      throw DataError("non-finite drive-cycle sample");
    }
    if (i > 0 && !(t[i] > t[i - 1])) {
      throw DataError("drive-cycle time stamps must be strictly increasing");
    }
  }
  DriveCycle c;
  c.delta_t = p.delta_t;
  const double span = t.back() - t.front();
  const auto K = static_cast<std::size_t>(std::floor(span / p.delta_t + 1e-9)) + 1;
  c.t.resize(K);
  c.v.resize(K);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < K; ++k) {
    const double tk = t.front() + static_cast<double>(k) * p.delta_t;
    while (seg + 2 < t.size() && t[seg + 1] < tk) {
      ++seg;
    }
    const double a = std::clamp((tk - t[seg]) / (t[seg + 1] - t[seg]), 0.0, 1.0);
    const double vk = v[seg] + a * (v[seg + 1] - v[seg]);
    c.t[k] = tk;
    c.v[k] = std::clamp(vk, 0.0, p.v_max);
  }
  double sum = 0.0;
  for (double x : c.v) {
    sum += x;
  }
  c.mean_speed = sum / static_cast<double>(K);
  return c;
}

DriveCycle load_cycle(const std::string & path, const VehicleParams & params)
{
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open drive cycle '" + path + "'");
  }
  std::string line;
  int lineno = 0;
  bool header = false;
  std::vector<double> t;
  std::vector<double> v;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty()) {
      continue;
    }
    if (!header) {
      std::string h;
      for (char ch : s) {
        if (ch != ' ' && ch != '\t') {
          h += ch;
        }
      }
      if (h != "t_s,v_mps") {
        throw DataError("drive cycle '" + path + "' must start with header t_s,v_mps");
      }
      header = true;
      continue;
    }
    const auto comma = s.find(',');
    if (comma == std::string::npos || s.find(',', comma + 1) != std::string::npos) {
      throw DataError("expected two columns at " + path + ":" + std::to_string(lineno));
    }
    const std::string where = path + ":" + std::to_string(lineno);
    t.push_back(parse_number(trim(s.substr(0, comma)), where));
    v.push_back(parse_number(trim(s.substr(comma + 1)), where));
  }
  if (!header) {
    throw DataError("drive cycle '" + path + "' is empty");
  }
  return resample_cycle(t, v, params);
}

}  // namespace evrmpc

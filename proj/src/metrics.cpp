// src/metrics.cpp

// Copyright 2026  The a2w Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "a2w/metrics.hpp"

#include <fmt/format.h>

#include <ostream>

#include "a2w/error.hpp"

namespace a2w {

double ErrorRate(const EditStats &stats) {
  Require(stats.ref_length > 0, "ErrorRate: empty reference");
  return 100.0 * static_cast<double>(stats.errors()) / static_cast<double>(stats.ref_length);
}

void ScoreReport::Write(std::ostream &os) const {
  os << "id\tref_len\tsub\tdel\tins\terrors\trate\n";
  auto line = [&os](const std::string &id, const EditStats &s) {
    const std::string rate = s.ref_length > 0 ? fmt::format("{:.2f}", ErrorRate(s)) : "nan";
    os << fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\n", id, s.ref_length, s.substitutions,
                      s.deletions, s.insertions, s.errors(), rate);
  };
  for (const auto &r : rows) line(r.id, r.stats);
  line("TOTAL", pooled);
}

}  // namespace a2w

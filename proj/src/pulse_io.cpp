// Copyright 2026 The hybridsim Authors
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

#include <charconv>
#include <cmath>
#include <sstream>

#include "hybridsim/evolution.hpp"
#include "hybridsim/expr_text.hpp"

namespace hybridsim {

std::string to_text(const PulseSequence& seq) {
  std::ostringstream os;
  for (const auto& m : seq.metadata) os << "# " << m << '\n';
  for (const auto& p : seq.pulses) {
    os << p.generator << ' ' << (p.sign < 0 ? "-1" : "+1") << ' ' << format_double(p.duration)
       << '\n';
  }
  return os.str();
}

PulseSequence parse_pulse_sequence(std::string_view text) {
  PulseSequence seq;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      line.remove_prefix(1);
      if (!line.empty() && line.front() == ' ') line.remove_prefix(1);
      if (!seq.pulses.empty()) throw ParseError("metadata must precede pulses", line_no, 1);
      seq.metadata.emplace_back(line);
      continue;
    }
    const std::size_t s1 = line.find(' ');
    const std::size_t s2 = s1 == std::string_view::npos ? s1 : line.find(' ', s1 + 1);
    if (s2 == std::string_view::npos) {
      throw ParseError("expected '<id> <sign> <duration>'", line_no, 1);
    }
    Pulse p;
    p.generator = std::string(line.substr(0, s1));
    const std::string_view sign = line.substr(s1 + 1, s2 - s1 - 1);
    if (sign == "+1") {
      p.sign = 1;
    } else if (sign == "-1") {
      p.sign = -1;
    } else {
      throw ParseError("sign must be +1 or -1", line_no, static_cast<int>(s1 + 2));
    }
    const std::string_view dur = line.substr(s2 + 1);
    const auto res = std::from_chars(dur.data(), dur.data() + dur.size(), p.duration);
    if (res.ec != std::errc() || res.ptr != dur.data() + dur.size() || !(p.duration >= 0.0) ||
        !std::isfinite(p.duration)) {
      throw ParseError("duration must be a finite number >= 0", line_no, static_cast<int>(s2 + 2));
    }
    seq.pulses.push_back(std::move(p));
  }
  return seq;
}

}  // namespace hybridsim

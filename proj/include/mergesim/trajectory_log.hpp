#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <utility>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "mergesim/scene.hpp"

namespace mergesim {

inline constexpr std::string_view kTrajectoryHeader =
    "frame,time_s,actor_id,lane,s_m,d_m,v_mps,a_mps2,len_m,wid_m,role,decision";

/// One CSV row: an actor's state at a frame plus its negotiation role and the
/// decision it issued (or "-").
struct LoggedActor {
  ActorState state;
  std::string role = "-";
  std::string decision = "-";
};

struct Frame {
  std::int64_t index = 0;
  double time_s = 0.0;
  std::vector<LoggedActor> actors;

  std::vector<ActorState> states() const {
    std::vector<ActorState> out;
    out.reserve(actors.size());
    for (const auto& a : actors) out.push_back(a.state);
    return out;
  }
};

class LogFormatError : public std::runtime_error {
 public:
  LogFormatError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

namespace csv_detail {

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline void put_fixed(std::string& out, double x, int precision) {
  char buf[64];
  if (x == 0.0) x = 0.0;  // drop negative zero
  const int n = std::snprintf(buf, sizeof buf, "%.*f", precision, x);
  out.append(buf, static_cast<std::size_t>(n));
}

}  // namespace csv_detail

/// Appends one CSV row (LF terminated) to `out`.
inline void append_row(std::string& out, std::int64_t frame, double time_s, const LoggedActor& row) {
  const ActorState& s = row.state;
  out += std::to_string(frame);
  out += ',';
  csv_detail::put_fixed(out, time_s, 3);
  out += ',';
  out += s.id;
  out += ',';
  out += std::to_string(s.lane);
  const std::initializer_list<std::pair<double, int>> cols{
      {s.s, 4}, {s.d, 4}, {s.v, 4}, {s.a, 4}, {s.length, 3}, {s.width, 3}};
  for (auto [x, prec] : cols) {
    out += ',';
    csv_detail::put_fixed(out, x, prec);
  }
  out += ',';
  out += row.role;
  out += ',';
  out += row.decision;
  out += '\n';
}

inline std::string format_trajectory_log(const std::vector<Frame>& frames) {
  std::string out(kTrajectoryHeader);
  out += '\n';
  for (const Frame& f : frames)
    for (const LoggedActor& a : f.actors) append_row(out, f.index, f.time_s, a);
  return out;
}

inline void write_trajectory_log(const std::string& path, const std::vector<Frame>& frames) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << format_trajectory_log(frames);
  if (!os) throw std::runtime_error("write failed: " + path);
}

/// Parses a trajectory CSV. Columns may appear in any order but all must be
/// present. Rows are grouped into frames; a frame index lower than the
/// previous row's is rejected, as are non-finite numbers.
inline std::vector<Frame> parse_trajectory_log(std::istream& is) {
  static constexpr std::array<std::string_view, 12> kColumns{
      "frame", "time_s", "actor_id", "lane", "s_m", "d_m",
      "v_mps", "a_mps2", "len_m",    "wid_m", "role", "decision"};
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line)) throw LogFormatError(0, "empty file (missing header)");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = csv_detail::split(line);
  std::array<std::size_t, kColumns.size()> col{};
  std::string missing;
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    std::size_t found = header.size();
    for (std::size_t h = 0; h < header.size(); ++h)
      if (header[h] == kColumns[c]) found = h;
    if (found == header.size()) missing += (missing.empty() ? "" : ", ") + std::string(kColumns[c]);
    col[c] = found;
  }
  if (!missing.empty()) throw LogFormatError(1, "missing columns: " + missing);

  std::vector<Frame> frames;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = csv_detail::split(line);
    if (fields.size() != header.size())
      throw LogFormatError(lineno, "expected " + std::to_string(header.size()) + " fields, got " +
                                       std::to_string(fields.size()));
    auto field = [&](std::size_t c) { return fields[col[c]]; };
    auto number = [&](std::size_t c) {
      const std::string_view f = field(c);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size())
        throw LogFormatError(lineno, "column " + std::string(kColumns[c]) + ": not a number");
      if (!std::isfinite(v))
        throw LogFormatError(lineno, "column " + std::string(kColumns[c]) + ": non-finite value");
      return v;
    };
    auto integer = [&](std::size_t c) {
      const std::string_view f = field(c);
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size())
        throw LogFormatError(lineno, "column " + std::string(kColumns[c]) + ": not an integer");
      return v;
    };

    const std::int64_t frame = integer(0);
    LoggedActor row;
    const double time_s = number(1);
    row.state.id = std::string(field(2));
    if (row.state.id.empty()) throw LogFormatError(lineno, "column actor_id: empty");
    row.state.lane = static_cast<int>(integer(3));
    row.state.s = number(4);
    row.state.d = number(5);
    row.state.v = number(6);
    row.state.a = number(7);
    row.state.length = number(8);
    row.state.width = number(9);
    row.role = std::string(field(10));
    row.decision = std::string(field(11));

    if (frames.empty() || frames.back().index != frame) {
      if (!frames.empty() && frame < frames.back().index)
        throw LogFormatError(lineno, "frame index " + std::to_string(frame) + " after " +
                                         std::to_string(frames.back().index));
      frames.push_back(Frame{frame, time_s, {}});
    }
    frames.back().actors.push_back(std::move(row));
  }
  return frames;
}

inline std::vector<Frame> load_trajectory_log(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw LogFormatError(0, "cannot open " + path);
  return parse_trajectory_log(is);
}

inline std::size_t row_count(const std::vector<Frame>& frames) noexcept {
  std::size_t n = 0;
  for (const auto& f : frames) n += f.actors.size();
  return n;
}

}  // namespace mergesim

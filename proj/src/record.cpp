#include "ensfuzz/record.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>

namespace ensfuzz {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_u64(std::string_view tok, std::uint64_t& out) {
  int base = 10;
  if (tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X')) {
    tok.remove_prefix(2);
    base = 16;
  }
  if (tok.empty()) return false;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out, base);
  return ec == std::errc{} && ptr == tok.data() + tok.size();
}

bool is_address_token(std::string_view tok) {
  while (!tok.empty() && (tok.front() == '[' || tok.front() == '(' || tok.front() == '@')) tok.remove_prefix(1);
  while (!tok.empty() && (tok.back() == ']' || tok.back() == ')')) tok.remove_suffix(1);
  std::uint64_t ignored = 0;
  return tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X') && parse_u64(tok, ignored);
}

void put_le64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

}  // namespace

std::string Frame::str() const {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, offset, 16);
  return function + "+0x" + std::string(buf, res.ptr);
}

Frame normalize_frame(std::string_view text) {
  std::string_view chosen;
  std::size_t pos = 0;
  text = trim(text);
  while (pos < text.size()) {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    auto end = text.find_first_of(" \t", pos);
    auto tok = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    if (!tok.empty() && !is_address_token(tok) && chosen.empty()) chosen = tok;
    if (end == std::string_view::npos) break;
    pos = end;
  }
  Frame f;
  if (chosen.empty()) {
    f.function = "??";
    return f;
  }
  auto plus = chosen.rfind('+');
  std::uint64_t off = 0;
  if (plus != std::string_view::npos && plus > 0 && parse_u64(chosen.substr(plus + 1), off)) {
    f.function = std::string(chosen.substr(0, plus));
    f.offset = off;
  } else {
    f.function = std::string(chosen);
  }
  return f;
}

ExecutionResult parse_coverage(std::string_view text) {
  ExecutionResult r;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  bool saw_crash = false;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    if (saw_crash) throw ParseError(lineno, "CRASH must be the last line");
    if (line.starts_with("CRASH")) {
      saw_crash = true;
      auto rest = trim(line.substr(5));
      while (!rest.empty()) {
        auto semi = rest.find(';');
        auto frame = trim(rest.substr(0, semi));
        if (!frame.empty()) r.stack_frames.push_back(normalize_frame(frame));
        if (semi == std::string_view::npos) break;
        rest = rest.substr(semi + 1);
      }
      if (r.stack_frames.empty()) r.stack_frames.push_back(Frame{"??", 0});
      r.crashed = true;
      continue;
    }
    auto sp = line.find_first_of(" \t");
    std::uint64_t edge = 0;
    std::uint64_t count = 0;
    if (sp == std::string_view::npos || !parse_u64(line.substr(0, sp), edge) ||
        !parse_u64(trim(line.substr(sp)), count)) {
      throw ParseError(lineno, "expected `edge_id count`");
    }
    r.coverage.add(edge, count);
  }
  return r;
}

std::string format_coverage(const ExecutionResult& r) {
  std::string out;
  for (const auto& [edge, count] : r.coverage) {
    out += std::to_string(edge);
    out += ' ';
    out += std::to_string(count);
    out += '\n';
  }
  if (r.crashed) {
    out += "CRASH ";
    for (std::size_t i = 0; i < r.stack_frames.size(); ++i) {
      if (i) out += ';';
      out += r.stack_frames[i].str();
    }
    out += '\n';
  }
  return out;
}

std::uint8_t count_bucket(std::uint64_t count) {
  if (count <= 3) return static_cast<std::uint8_t>(count == 0 ? 0 : count - 1);
  if (count <= 7) return 3;
  if (count <= 15) return 4;
  if (count <= 31) return 5;
  if (count <= 127) return 6;
  return 7;
}

PathId path_id(const CoverageMap& c) {
  std::string bytes;
  bytes.reserve(c.size() * 9);
  for (const auto& [edge, count] : c) {
    put_le64(bytes, edge);
    bytes.push_back(static_cast<char>(count_bucket(count)));
  }
  PathId id;
  id.bytes = blake2b_128(bytes);
  return id;
}

CrashId crash_id(const std::vector<Frame>& frames) {
  if (frames.empty()) throw Error("crash_id: empty stack trace");
  std::string bytes;
  const std::size_t n = std::min(kCrashFrames, frames.size());
  for (std::size_t i = 0; i < n; ++i) {
    put_le64(bytes, frames[i].function.size());
    bytes += frames[i].function;
    put_le64(bytes, frames[i].offset);
  }
  CrashId id;
  id.bytes = blake2b_128(bytes);
  return id;
}

MergeDelta merge(FuzzRecord& m, const ExecutionResult& r) {
  MergeDelta delta;
  for (const auto& [edge, count] : r.coverage) {
    if (!m.global_coverage.contains(edge)) ++delta.new_edges;
    m.global_coverage.add(edge, count);
  }
  delta.new_path = m.known_paths.insert(path_id(r.coverage)).second;
  if (r.crashed) {
    ++m.crash_total;
    delta.new_unique_crash = m.known_crashes.insert(crash_id(r.stack_frames)).second;
  }
  return delta;
}

double less_frequent_threshold(const FuzzRecord& m) {
  if (m.global_coverage.empty()) return 0.0;
  long double sum = 0;
  for (const auto& [edge, count] : m.global_coverage) sum += static_cast<long double>(count);
  return static_cast<double>(0.5L * sum / static_cast<long double>(m.global_coverage.size()));
}

}  // namespace ensfuzz

#include "ensfuzz/adapters.hpp"

namespace ensfuzz {
namespace {

std::size_t occurrences(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + needle.size())) ++n;
  return n;
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

void AdapterSpec::validate() const {
  if (name.empty()) throw Error("adapter without a name");
  if (kind != AdapterKind::Process) return;
  for (const char* ph : {"{target}", "{in}", "{out}"}) {
    const auto n = occurrences(cmd, ph);
    if (n != 1) {
      throw Error("adapter '" + name + "': placeholder " + ph + " must appear exactly once in cmd (found " +
                  std::to_string(n) + ")");
    }
  }
  if (seeds_glob.empty()) throw Error("adapter '" + name + "': empty seeds_glob");
}

std::string expand_template(const std::string& cmd, const std::string& target, const std::string& in,
                            const std::string& out, std::size_t core) {
  std::string s = cmd;
  replace_all(s, "{target}", target);
  replace_all(s, "{in}", in);
  replace_all(s, "{out}", out);
  replace_all(s, "{core}", std::to_string(core));
  return s;
}

}  // namespace ensfuzz

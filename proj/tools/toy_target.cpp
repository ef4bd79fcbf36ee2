// A tiny hand-instrumented target. It reads one input file, prints the edges
// it takes in coverage interchange format and aborts on inputs starting with
// "FUZZ!". Edge ownership is listed in tests/fixtures/toy/edges.txt.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <map>
#include <string>

namespace {

std::map<unsigned, unsigned> hits;

void edge(unsigned id) { ++hits[id]; }

void flush() {
  for (const auto& [id, n] : hits) std::printf("%u %u\n", id, n);
  std::fflush(stdout);
}

void check_magic(const std::string& in) {
  edge(10);
  if (in.size() > 1 && in[1] == 'U') {
    edge(11);
    if (in.size() > 2 && in[2] == 'Z') {
      edge(12);
      if (in.size() > 3 && in[3] == 'Z') {
        edge(13);
        if (in.size() > 4 && in[4] == '!') {
          edge(14);
          flush();
          std::printf("CRASH check_magic+0x4c;parse+0x21;main+0x12\n");
          std::fflush(stdout);
          std::abort();
        }
      }
    }
  }
}

void parse(const std::string& in) {
  edge(2);
  for (char c : in) {
    edge(3);
    if (c >= '0' && c <= '9') edge(4);
  }
  if (!in.empty() && in[0] == 'F') check_magic(in);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: toy_target <input-file>\n");
    return 2;
  }
  std::ifstream f(argv[1], std::ios::binary);
  std::string in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  edge(1);
  if (in.empty()) {
    edge(5);
  } else {
    parse(in);
  }
  flush();
  return 0;
}

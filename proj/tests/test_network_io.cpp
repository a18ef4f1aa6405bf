#include "cdp/builtins.hpp"
#include "cdp/network_io.hpp"

#include <doctest.h>

#include <sstream>
#include <string>

using cdp::Vector;

namespace {

const char* kSmall = R"(cndp-network v1
# two parallel links
links 2
link a A=1 B=2 K=3 D=4   # trailing comment
link b A=1.5 B=0.5e1 K=2 D=1

paths 2
path p1 od=w links=a
path p2 od=w links=b
demands 1
od w r=6
)";

cdp::NetworkInstance parse(const std::string& text) {
  std::istringstream in(text);
  return cdp::parse_network(in, "net.txt");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const cdp::ParseError& e) {
    return e.what();
  }
  return "";
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("parses a small network with comments and blank lines") {
  const auto n = parse(kSmall);
  CHECK(n.link_ids == std::vector<std::string>{"a", "b"});
  CHECK(n.path_ids == std::vector<std::string>{"p1", "p2"});
  CHECK(n.od_ids == std::vector<std::string>{"w"});
  CHECK(n.A(1) == 1.5);
  CHECK(n.B(1) == 5.0);
  CHECK(n.D(0) == 4.0);
  CHECK(n.r(0) == 6.0);
  CHECK(n.Delta(0, 0) == 1.0);
  CHECK(n.Delta(1, 0) == 0.0);
  CHECK(n.Lambda(0, 1) == 1.0);
}

TEST_CASE("write then parse reproduces the instance exactly") {
  auto net = cdp::synthetic_network((Vector(2) << 0.1, 1.0 / 3.0).finished());
  net.A(0) = 1.0 / 7.0;
  std::ostringstream out;
  cdp::write_network(out, net);
  const auto back = parse(out.str());
  CHECK(back.link_ids == net.link_ids);
  CHECK(back.path_ids == net.path_ids);
  CHECK(back.od_ids == net.od_ids);
  CHECK(back.A == net.A);
  CHECK(back.B == net.B);
  CHECK(back.K == net.K);
  CHECK(back.D == net.D);
  CHECK(back.r == net.r);
  CHECK(back.Delta == net.Delta);
  CHECK(back.Lambda == net.Lambda);

  std::ostringstream again;
  cdp::write_network(again, back);
  CHECK(again.str() == out.str());
}

TEST_CASE("errors carry the source name and line number") {
  CHECK(error_of(replace(kSmall, "cndp-network v1", "network")).find("net.txt:1:") == 0);
  CHECK(error_of(replace(kSmall, "cndp-network v1", "network")).find("header") != std::string::npos);

  const auto dup_link = error_of(replace(kSmall, "link b ", "link a "));
  CHECK(dup_link.find("net.txt:5:") == 0);
  CHECK(dup_link.find("duplicate link id 'a'") != std::string::npos);

  const auto dangling = error_of(replace(kSmall, "links=b", "links=c"));
  CHECK(dangling.find("net.txt:9:") == 0);
  CHECK(dangling.find("unknown link 'c'") != std::string::npos);

  const auto twice = error_of(replace(kSmall, "links=b", "links=b,a,b"));
  CHECK(twice.find("net.txt:9:") == 0);
  CHECK(twice.find("twice") != std::string::npos);

  const auto dup_path = error_of(replace(kSmall, "path p2", "path p1"));
  CHECK(dup_path.find("net.txt:9:") == 0);

  const auto bad_num = error_of(replace(kSmall, "K=2", "K=2x"));
  CHECK(bad_num.find("net.txt:5:") == 0);
  CHECK(bad_num.find("invalid number '2x'") != std::string::npos);

  const auto missing = error_of(replace(kSmall, " D=4", ""));
  CHECK(missing.find("net.txt:4:") == 0);
  CHECK(missing.find("missing field 'D'") != std::string::npos);

  const auto unknown_od = error_of(replace(kSmall, "path p2 od=w", "path p2 od=v"));
  CHECK(unknown_od.find("net.txt:9:") == 0);
  CHECK(unknown_od.find("unknown od 'v'") != std::string::npos);

  const auto trailing = error_of(std::string(kSmall) + "extra\n");
  CHECK(trailing.find("trailing content") != std::string::npos);

  const auto truncated = error_of(replace(kSmall, "od w r=6\n", ""));
  CHECK(truncated.find("end of file") != std::string::npos);

  // Structurally fine but semantically invalid: non-positive capacity.
  const auto zero_k = error_of(replace(kSmall, "K=3", "K=0"));
  CHECK(zero_k.find("net.txt") == 0);

  CHECK_THROWS_AS(cdp::load_network("/nonexistent/net.txt"), cdp::ParseError);
}

TEST_CASE("bundled 16-link data loads") {
  const auto net = cdp::load_network(std::string(CDP_DATA_DIR) + "/harker16.txt");
  CHECK(net.n_links() == 16);
  CHECK(net.n_od() == 2);
  CHECK(net.n_paths() == 17);
  CHECK(net.r(0) == 5.0);
  CHECK(net.r(1) == 10.0);
  CHECK(net.paths_of(0).size() + net.paths_of(1).size() == 17);
}

#include "cdp/network_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

namespace cdp {

namespace {

class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  // Next non-empty line with comments stripped, split on whitespace.
  std::optional<std::vector<std::string>> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++lineno_;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream ss(line);
      std::vector<std::string> tokens;
      for (std::string tok; ss >> tok;) tokens.push_back(tok);
      if (!tokens.empty()) return tokens;
    }
    return std::nullopt;
  }

  std::vector<std::string> expect() {
    auto t = next();
    if (!t) fail("unexpected end of file");
    return *t;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(source_ + ":" + std::to_string(lineno_) + ": " + msg);
  }

  double number(const std::string& text) const {
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) fail("invalid number '" + text + "'");
    return v;
  }

  std::size_t count(const std::vector<std::string>& t, const std::string& keyword) const {
    if (t.size() != 2 || t[0] != keyword) fail("expected '" + keyword + " <count>'");
    const double v = number(t[1]);
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) fail("invalid count '" + t[1] + "'");
    return static_cast<std::size_t>(v);
  }

  // Parses key=value tokens starting at index `from`.
  std::map<std::string, std::string> fields(const std::vector<std::string>& t, std::size_t from) const {
    std::map<std::string, std::string> out;
    for (std::size_t i = from; i < t.size(); ++i) {
      const auto eq = t[i].find('=');
      if (eq == std::string::npos || eq == 0) fail("expected key=value, got '" + t[i] + "'");
      const std::string key = t[i].substr(0, eq);
      if (out.count(key)) fail("duplicate field '" + key + "'");
      out[key] = t[i].substr(eq + 1);
    }
    return out;
  }

  const std::string& require(const std::map<std::string, std::string>& f, const std::string& key) const {
    auto it = f.find(key);
    if (it == f.end()) fail("missing field '" + key + "'");
    return it->second;
  }

  [[nodiscard]] int line() const { return lineno_; }

 private:
  std::istream& in_;
  std::string source_;
  int lineno_ = 0;
};

}  // namespace

NetworkInstance parse_network(std::istream& in, const std::string& source) {
  Reader rd(in, source);
  {
    const auto header = rd.expect();
    if (header.size() != 2 || header[0] != "cndp-network" || header[1] != "v1")
      rd.fail("expected header 'cndp-network v1'");
  }

  NetworkInstance inst;

  const std::size_t n_links = rd.count(rd.expect(), "links");
  std::map<std::string, Eigen::Index> link_index;
  inst.A.resize(static_cast<Eigen::Index>(n_links));
  inst.B.resize(static_cast<Eigen::Index>(n_links));
  inst.K.resize(static_cast<Eigen::Index>(n_links));
  inst.D.resize(static_cast<Eigen::Index>(n_links));
  for (std::size_t i = 0; i < n_links; ++i) {
    const auto t = rd.expect();
    if (t.size() < 2 || t[0] != "link") rd.fail("expected 'link <id> A=.. B=.. K=.. D=..'");
    if (link_index.count(t[1])) rd.fail("duplicate link id '" + t[1] + "'");
    const auto f = rd.fields(t, 2);
    for (const auto& [key, _] : f) {
      if (key != "A" && key != "B" && key != "K" && key != "D") rd.fail("unknown link field '" + key + "'");
    }
    const auto k = static_cast<Eigen::Index>(i);
    inst.A(k) = rd.number(rd.require(f, "A"));
    inst.B(k) = rd.number(rd.require(f, "B"));
    inst.K(k) = rd.number(rd.require(f, "K"));
    inst.D(k) = rd.number(rd.require(f, "D"));
    link_index[t[1]] = k;
    inst.link_ids.push_back(t[1]);
  }

  const std::size_t n_paths = rd.count(rd.expect(), "paths");
  struct PathRec {
    std::string od;
    std::vector<Eigen::Index> links;
    int line;
  };
  std::vector<PathRec> paths;
  std::map<std::string, bool> path_seen;
  for (std::size_t i = 0; i < n_paths; ++i) {
    const auto t = rd.expect();
    if (t.size() < 2 || t[0] != "path") rd.fail("expected 'path <id> od=<w> links=<id,...>'");
    if (path_seen.count(t[1])) rd.fail("duplicate path id '" + t[1] + "'");
    path_seen[t[1]] = true;
    const auto f = rd.fields(t, 2);
    for (const auto& [key, _] : f) {
      if (key != "od" && key != "links") rd.fail("unknown path field '" + key + "'");
    }
    PathRec rec{rd.require(f, "od"), {}, rd.line()};
    std::stringstream ss(rd.require(f, "links"));
    for (std::string id; std::getline(ss, id, ',');) {
      auto it = link_index.find(id);
      if (it == link_index.end()) rd.fail("path '" + t[1] + "' references unknown link '" + id + "'");
      for (Eigen::Index prev : rec.links) {
        if (prev == it->second) rd.fail("path '" + t[1] + "' uses link '" + id + "' twice");
      }
      rec.links.push_back(it->second);
    }
    if (rec.links.empty()) rd.fail("path '" + t[1] + "' has no links");
    paths.push_back(std::move(rec));
    inst.path_ids.push_back(t[1]);
  }

  const std::size_t n_od = rd.count(rd.expect(), "demands");
  std::map<std::string, Eigen::Index> od_index;
  inst.r.resize(static_cast<Eigen::Index>(n_od));
  for (std::size_t i = 0; i < n_od; ++i) {
    const auto t = rd.expect();
    if (t.size() < 2 || t[0] != "od") rd.fail("expected 'od <w> r=<f>'");
    if (od_index.count(t[1])) rd.fail("duplicate od id '" + t[1] + "'");
    const auto f = rd.fields(t, 2);
    for (const auto& [key, _] : f) {
      if (key != "r") rd.fail("unknown od field '" + key + "'");
    }
    const auto k = static_cast<Eigen::Index>(i);
    inst.r(k) = rd.number(rd.require(f, "r"));
    od_index[t[1]] = k;
    inst.od_ids.push_back(t[1]);
  }
  if (rd.next()) rd.fail("trailing content after demands section");

  inst.Delta = Matrix::Zero(static_cast<Eigen::Index>(n_links), static_cast<Eigen::Index>(n_paths));
  inst.Lambda = Matrix::Zero(static_cast<Eigen::Index>(n_od), static_cast<Eigen::Index>(n_paths));
  for (std::size_t j = 0; j < paths.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    auto it = od_index.find(paths[j].od);
    if (it == od_index.end())
      throw ParseError(source + ":" + std::to_string(paths[j].line) + ": path references unknown od '" +
                       paths[j].od + "'");
    inst.Lambda(it->second, col) = 1.0;
    for (Eigen::Index a : paths[j].links) inst.Delta(a, col) = 1.0;
  }

  try {
    inst.validate();
  } catch (const ConfigError& e) {
    throw ParseError(source + ": " + e.what());
  }
  return inst;
}

NetworkInstance load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  return parse_network(in, path);
}

void write_network(std::ostream& out, const NetworkInstance& inst) {
  const auto prec = out.precision(17);
  out << "cndp-network v1\n";
  out << "links " << inst.n_links() << '\n';
  for (Eigen::Index a = 0; a < inst.n_links(); ++a) {
    out << "link " << inst.link_ids[static_cast<std::size_t>(a)] << " A=" << inst.A(a) << " B=" << inst.B(a)
        << " K=" << inst.K(a) << " D=" << inst.D(a) << '\n';
  }
  out << "paths " << inst.n_paths() << '\n';
  for (Eigen::Index j = 0; j < inst.n_paths(); ++j) {
    Eigen::Index w = 0;
    for (Eigen::Index i = 0; i < inst.n_od(); ++i) {
      if (inst.Lambda(i, j) != 0.0) w = i;
    }
    out << "path " << inst.path_ids[static_cast<std::size_t>(j)] << " od=" << inst.od_ids[static_cast<std::size_t>(w)]
        << " links=";
    bool first = true;
    for (Eigen::Index a = 0; a < inst.n_links(); ++a) {
      if (inst.Delta(a, j) == 0.0) continue;
      if (!first) out << ',';
      out << inst.link_ids[static_cast<std::size_t>(a)];
      first = false;
    }
    out << '\n';
  }
  out << "demands " << inst.n_od() << '\n';
  for (Eigen::Index w = 0; w < inst.n_od(); ++w) {
    out << "od " << inst.od_ids[static_cast<std::size_t>(w)] << " r=" << inst.r(w) << '\n';
  }
  out.precision(prec);
}

}  // namespace cdp

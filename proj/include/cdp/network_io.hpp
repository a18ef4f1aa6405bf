#pragma once

#include "cdp/cndp.hpp"

#include <iosfwd>
#include <string>

namespace cdp {

/// Reads the line-oriented `cndp-network v1` format:
///
///   cndp-network v1
///   links <n>
///   link <id> A=<f> B=<f> K=<f> D=<f>        (n lines)
///   paths <m>
///   path <id> od=<w> links=<id,id,...>       (m lines)
///   demands <q>
///   od <w> r=<f>                             (q lines)
///
/// `#` starts a comment. Errors carry `<source>:<line>:`.
NetworkInstance parse_network(std::istream& in, const std::string& source = "<input>");

NetworkInstance load_network(const std::string& path);

/// Inverse of parse_network (17 significant digits).
void write_network(std::ostream& out, const NetworkInstance& inst);

}  // namespace cdp

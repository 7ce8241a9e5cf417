#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mrf/errors.hpp"

namespace mrf {

// Update-stream text format, one record per line:
//   v                          new vertex (takes the next id)
//   a <tail> <head> <cap> <cost>   insert edge (takes the next edge id)
//   d <edge-id>                delete edge
//   q                          application-defined query point
// Comments start with '#'; blank lines are skipped.
struct StreamRecord {
  enum class Kind { add_vertex, add_edge, del_edge, query };
  Kind kind;
  int tail = -1, head = -1;
  long long cap = 1, cost = 0;
  int edge = -1;
};

struct UpdateStream {
  std::vector<StreamRecord> records;
  int vertex_count = 0;  // vertices declared via 'v'
  std::size_t edge_count = 0;
};

inline UpdateStream parseStream(std::istream& in) {
  UpdateStream s;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    auto parse_fail = [&](const std::string& why) {
      fail(Errc::parse_error, "line " + std::to_string(lineno) + ": " + why);
    };
    if (tok == "v") {
      s.records.push_back({StreamRecord::Kind::add_vertex});
      ++s.vertex_count;
    } else if (tok == "a") {
      StreamRecord r{StreamRecord::Kind::add_edge};
      if (!(ls >> r.tail >> r.head >> r.cap >> r.cost))
        parse_fail("expected: a <tail> <head> <cap> <cost>");
      if (r.tail < 0 || r.head < 0 || r.tail >= s.vertex_count || r.head >= s.vertex_count)
        parse_fail("edge endpoint out of range");
      if (r.cap < 1) parse_fail("capacity must be at least 1");
      s.records.push_back(r);
      ++s.edge_count;
    } else if (tok == "d") {
      StreamRecord r{StreamRecord::Kind::del_edge};
      if (!(ls >> r.edge)) parse_fail("expected: d <edge-id>");
      s.records.push_back(r);
    } else if (tok == "q") {
      s.records.push_back({StreamRecord::Kind::query});
    } else {
      parse_fail("unknown record '" + tok + "'");
    }
  }
  return s;
}

inline void writeStream(std::ostream& out, const UpdateStream& s) {
  for (const auto& r : s.records) {
    switch (r.kind) {
      case StreamRecord::Kind::add_vertex: out << "v\n"; break;
      case StreamRecord::Kind::add_edge:
        out << "a " << r.tail << ' ' << r.head << ' ' << r.cap << ' ' << r.cost << "\n";
        break;
      case StreamRecord::Kind::del_edge: out << "d " << r.edge << "\n"; break;
      case StreamRecord::Kind::query: out << "q\n"; break;
    }
  }
}

}  // namespace mrf

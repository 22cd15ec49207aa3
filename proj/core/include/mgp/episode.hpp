#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mgp/linalg.hpp"

namespace mgp {

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// One multivariate series: strictly increasing timestamps, an N x M
// observation table and a presence mask (true = observed).  Entries of obs
// where the mask is false are meaningless and must never be read.
struct Episode {
  std::string id;
  Vector times;
  Matrix obs;
  Mask mask;
  std::vector<std::string> channels;

  Eigen::Index n() const { return times.size(); }
  Eigen::Index m() const { return obs.cols(); }
  Eigen::Index n_present() const { return mask.count(); }
  bool complete() const { return mask.all(); }

  // checks strict time ordering, shape agreement, one present entry per row
  void validate() const;
};

// CSV layout: header `episode_id,time,<ch1>,...,<chM>`, '.' decimal point,
// empty cell = missing.  Lines starting with '#' are metadata comments and
// are skipped.  Rows are sorted by time on ingest; equal timestamps are
// rejected.  Exactly one episode_id per file.
Episode ingest_csv(const std::string& path);

// 17 significant digits, so ingest_csv(write_episode_csv(ep)) round-trips
// every double exactly.  comments are emitted as leading '# key=value' lines.
void write_episode_csv(const Episode& ep, const std::string& path,
                       const std::vector<std::string>& comments = {});

// Split off the last k observations by time (the hold-out protocol).
// first = training episode (N-k rows), second = held-out episode (k rows).
std::pair<Episode, Episode> split_last(const Episode& ep, Eigen::Index k);

}  // namespace mgp

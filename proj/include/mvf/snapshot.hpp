#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <vector>

#include "mvf/grid.hpp"

namespace mvf {

/// Binary field snapshot.
///
/// Layout: 8-byte magic "MVF1SNAP"; 8-byte little-endian length L; L bytes
/// of UTF-8 JSON {nx, ny, lx, ly, components, bc, time}; then
/// components * (nx+1) * (ny+1) little-endian doubles ordered as
/// [j][i][component] (y outermost, component fastest). `bc` is a single tag
/// when all components share it, otherwise one tag per component.
struct Snapshot {
  Grid grid{8, 8, 1.0, 1.0};
  double time = 0.0;
  std::vector<Bc> bc;      // one per component
  Eigen::MatrixXd values;  // nodes x components
};

void write_snapshot(const std::filesystem::path& path, const Snapshot& snap);
Snapshot read_snapshot(const std::filesystem::path& path);

template <int C>
void write_field(const std::filesystem::path& path, const Field<C>& f, double time) {
  Snapshot s{f.grid(), time, std::vector<Bc>(C, f.bc()), f.values()};
  write_snapshot(path, s);
}

template <int C>
Field<C> read_field(const std::filesystem::path& path, double* time = nullptr) {
  Snapshot s = read_snapshot(path);
  if (s.values.cols() != C) {
    throw Error(ErrorKind::io, path.string() + ": expected " + std::to_string(C) +
                                   " components, found " + std::to_string(s.values.cols()));
  }
  Field<C> f(s.grid, s.bc.front());
  f.values() = s.values;
  if (time) *time = s.time;
  return f;
}

}  // namespace mvf

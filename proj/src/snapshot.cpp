#include "mvf/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace mvf {
namespace {

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O assumes a little-endian host");

constexpr char kMagic[8] = {'M', 'V', 'F', '1', 'S', 'N', 'A', 'P'};

}  // namespace

void write_snapshot(const std::filesystem::path& path, const Snapshot& snap) {
  const Grid& g = snap.grid;
  const auto comps = static_cast<int>(snap.values.cols());
  if (snap.values.rows() != g.nodes() || static_cast<int>(snap.bc.size()) != comps) {
    throw Error(ErrorKind::structural, "snapshot shape does not match its grid");
  }
  nlohmann::json header;
  header["nx"] = g.nx();
  header["ny"] = g.ny();
  header["lx"] = g.lx();
  header["ly"] = g.ly();
  header["components"] = comps;
  bool uniform = true;
  for (auto b : snap.bc) uniform = uniform && b == snap.bc.front();
  if (uniform) {
    header["bc"] = std::string(to_string(snap.bc.front()));
  } else {
    auto arr = nlohmann::json::array();
    for (auto b : snap.bc) arr.push_back(std::string(to_string(b)));
    header["bc"] = arr;
  }
  header["time"] = snap.time;
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  out.write(kMagic, 8);
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), 8);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  std::vector<double> buf(static_cast<std::size_t>(g.nodes()) * comps);
  std::size_t k = 0;
  for (int node = 0; node < g.nodes(); ++node) {
    for (int c = 0; c < comps; ++c) buf[k++] = snap.values(node, c);
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(double)));
  if (!out) throw Error(ErrorKind::io, "failed writing " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open snapshot " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw Error(ErrorKind::io, path.string() + ": bad snapshot magic");
  }
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), 8);
  if (!in || len > (1u << 20)) throw Error(ErrorKind::io, path.string() + ": bad header length");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw Error(ErrorKind::io, path.string() + ": truncated header");

  Snapshot snap;
  int comps = 0;
  try {
    const auto header = nlohmann::json::parse(text);
    snap.grid = Grid(header.at("nx").get<int>(), header.at("ny").get<int>(),
                     header.at("lx").get<double>(), header.at("ly").get<double>());
    comps = header.at("components").get<int>();
    snap.time = header.at("time").get<double>();
    const auto& bc = header.at("bc");
    if (comps < 1) throw Error(ErrorKind::io, "component count must be positive");
    if (bc.is_string()) {
      snap.bc.assign(comps, parse_bc(bc.get<std::string>()));
    } else {
      for (const auto& b : bc) snap.bc.push_back(parse_bc(b.get<std::string>()));
      if (static_cast<int>(snap.bc.size()) != comps) {
        throw Error(ErrorKind::io, "bc list length differs from component count");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::io, path.string() + ": bad snapshot header: " + e.what());
  } catch (const Error& e) {
    throw Error(ErrorKind::io, path.string() + ": " + e.what());
  }

  const int nodes = snap.grid.nodes();
  std::vector<double> buf(static_cast<std::size_t>(nodes) * comps);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(double)));
  if (!in) throw Error(ErrorKind::io, path.string() + ": truncated data block");
  snap.values.resize(nodes, comps);
  std::size_t k = 0;
  for (int node = 0; node < nodes; ++node) {
    for (int c = 0; c < comps; ++c) snap.values(node, c) = buf[k++];
  }
  return snap;
}

}  // namespace mvf

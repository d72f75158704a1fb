#include "cosafed/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "cosafed/rng.hpp"

namespace cosafed {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCategory::data, "cannot open '" + path + "'");
  }
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

std::vector<std::uint8_t> inflate_gzip(const std::vector<std::uint8_t>& in,
                                       const std::string& path) {
  z_stream zs{};
  if (inflateInit2(&zs, 15 + 32) != Z_OK) {  // accept gzip and zlib headers
    throw Error(ErrorCategory::data, "inflateInit failed for '" + path + "'");
  }
  std::vector<std::uint8_t> out;
  out.reserve(in.size() * 4);
  std::uint8_t buffer[1 << 16];
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  int rc = Z_OK;
  do {
    zs.next_out = buffer;
    zs.avail_out = sizeof(buffer);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw Error(ErrorCategory::data,
                  "corrupt gzip stream in '" + path + "'");
    }
    out.insert(out.end(), buffer, buffer + sizeof(buffer) - zs.avail_out);
  } while (rc != Z_STREAM_END);
  inflateEnd(&zs);
  return out;
}

std::vector<std::uint8_t> read_maybe_gzip(const std::string& path) {
  auto bytes = read_file(path);
  if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) {
    return inflate_gzip(bytes, path);
  }
  return bytes;
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t off) {
  return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
         (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

void write_be32(std::ofstream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                         static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(bytes, 4);
}

void require(bool ok, const std::string& field, const std::string& detail) {
  if (!ok) {
    throw Error(ErrorCategory::data, field + ": " + detail);
  }
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::string source_tag) {
  const auto img = read_maybe_gzip(images_path);
  const auto lab = read_maybe_gzip(labels_path);

  require(img.size() >= 16, "images header", "truncated file " + images_path);
  require(read_be32(img, 0) == kImageMagic, "images magic",
          "expected 0x00000803 in " + images_path);
  const std::uint32_t n_images = read_be32(img, 4);
  const std::uint32_t rows = read_be32(img, 8);
  const std::uint32_t cols = read_be32(img, 12);
  require(rows > 0 && cols > 0, "images dims", "zero dimension");
  require(img.size() == 16 + std::size_t(n_images) * rows * cols,
          "images payload", "truncated file " + images_path);

  require(lab.size() >= 8, "labels header", "truncated file " + labels_path);
  require(read_be32(lab, 0) == kLabelMagic, "labels magic",
          "expected 0x00000801 in " + labels_path);
  const std::uint32_t n_labels = read_be32(lab, 4);
  require(lab.size() == 8 + std::size_t(n_labels), "labels payload",
          "truncated file " + labels_path);
  require(n_images == n_labels, "count",
          "images hold " + std::to_string(n_images) + " examples but labels " +
              std::to_string(n_labels));

  Dataset ds;
  ds.rows = static_cast<int>(rows);
  ds.cols = static_cast<int>(cols);
  ds.source = std::move(source_tag);
  ds.features.resize(std::size_t(n_images) * rows * cols);
  for (std::size_t i = 0; i < ds.features.size(); ++i) {
    ds.features[i] = static_cast<float>(img[16 + i]) / 255.0f;
  }
  ds.labels.assign(lab.begin() + 8, lab.end());
  return ds;
}

void save_idx(const Dataset& ds, const std::string& images_path,
              const std::string& labels_path) {
  std::ofstream img(images_path, std::ios::binary);
  if (!img) {
    throw Error(ErrorCategory::io, "cannot write '" + images_path + "'");
  }
  write_be32(img, kImageMagic);
  write_be32(img, static_cast<std::uint32_t>(ds.size()));
  write_be32(img, static_cast<std::uint32_t>(ds.rows));
  write_be32(img, static_cast<std::uint32_t>(ds.cols));
  for (float v : ds.features) {
    img.put(static_cast<char>(std::lround(v * 255.0f)));
  }
  std::ofstream lab(labels_path, std::ios::binary);
  if (!lab) {
    throw Error(ErrorCategory::io, "cannot write '" + labels_path + "'");
  }
  write_be32(lab, kLabelMagic);
  write_be32(lab, static_cast<std::uint32_t>(ds.size()));
  lab.write(reinterpret_cast<const char*>(ds.labels.data()),
            static_cast<std::streamsize>(ds.labels.size()));
}

PartitionMode parse_partition_mode(const std::string& name) {
  if (name == "equal") return PartitionMode::Equal;
  if (name == "random") return PartitionMode::Random;
  throw Error(ErrorCategory::config, "unknown partition '" + name + "'");
}

const char* to_string(PartitionMode mode) noexcept {
  return mode == PartitionMode::Equal ? "equal" : "random";
}

namespace {

std::vector<std::int32_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::int32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_stream(seed, kSeedPartition);
  shuffle_seeded(order, rng);
  return order;
}

Partition slice_contiguous(std::vector<std::int32_t> order,
                           const std::vector<std::size_t>& sizes,
                           PartitionMode mode) {
  Partition part;
  part.mode = mode;
  part.assignments.reserve(sizes.size());
  std::size_t offset = 0;
  for (std::size_t s : sizes) {
    part.assignments.emplace_back(order.begin() + offset,
                                  order.begin() + offset + s);
    offset += s;
  }
  return part;
}

}  // namespace

Partition partition_equal(const Dataset& ds, int clients, std::uint64_t seed) {
  if (clients < 1) {
    throw Error(ErrorCategory::config, "partition: clients must be >= 1");
  }
  if (static_cast<std::size_t>(clients) > ds.size()) {
    throw Error(ErrorCategory::config,
                "partition: more clients than examples");
  }
  const std::size_t base = ds.size() / clients;
  const std::size_t remainder = ds.size() % clients;
  std::vector<std::size_t> sizes(clients, base);
  for (std::size_t i = 0; i < remainder; ++i) ++sizes[i];
  return slice_contiguous(shuffled_indices(ds.size(), seed), sizes,
                          PartitionMode::Equal);
}

Partition partition_random(const Dataset& ds, int clients, std::uint64_t seed,
                           int min_size) {
  if (clients < 1 || min_size < 1) {
    throw Error(ErrorCategory::config,
                "partition: clients and min_size must be >= 1");
  }
  const std::size_t reserve = std::size_t(clients) * std::size_t(min_size);
  if (reserve > ds.size()) {
    throw Error(ErrorCategory::config,
                "partition: min_size " + std::to_string(min_size) +
                    " infeasible for " + std::to_string(clients) +
                    " clients over " + std::to_string(ds.size()) + " examples");
  }
  const std::uint64_t pool = ds.size() - reserve;
  auto rng = make_stream(seed, kSeedPartition, /*a=*/1);
  std::vector<std::uint64_t> cuts(static_cast<std::size_t>(clients) - 1);
  for (auto& c : cuts) c = uniform_below(rng, pool + 1);
  std::sort(cuts.begin(), cuts.end());

  std::vector<std::size_t> sizes(clients);
  std::uint64_t prev = 0;
  for (int i = 0; i < clients; ++i) {
    const std::uint64_t cut = i + 1 < clients ? cuts[i] : pool;
    sizes[i] = static_cast<std::size_t>(min_size) + (cut - prev);
    prev = cut;
  }
  return slice_contiguous(shuffled_indices(ds.size(), seed), sizes,
                          PartitionMode::Random);
}

}  // namespace cosafed

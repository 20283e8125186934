#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mobs/stack.hpp"

namespace mobs {

/// Stack file layout (all integers little-endian):
///
///   offset  size  field
///        0     8  magic "MOBSSTK\x01"
///        8     4  nx
///       12     4  ny
///       16     4  nt
///       20     4  dtype tag (1 = float64)
///       24     4  label (0 absent, 1 present)
///       28     4  reserved, must be 0
///       32     8  seed
///       40   8·N  float64 payload, x fastest, then y, then t
inline constexpr std::size_t kStackHeaderBytes = 40;
inline constexpr std::uint32_t kDtypeFloat64 = 1;

/// Throws FormatError("header" | "dimension" | "payload", ...).
ImageStack read_stack(const std::filesystem::path& path,
                      std::optional<Dims> expected = std::nullopt);
void write_stack(const ImageStack& stack, const std::filesystem::path& path);

std::vector<unsigned char> encode_stack(const ImageStack& stack);
ImageStack decode_stack(const std::vector<unsigned char>& bytes,
                        std::optional<Dims> expected = std::nullopt);

struct ManifestEntry {
    std::string path;  // relative paths resolve against the manifest directory
    Label label;
};

/// Batch manifest JSON: {"master_seed": n, "stacks": [{"path": ..., "label": ...}]}.
struct Manifest {
    std::uint64_t master_seed = 0;
    std::vector<ManifestEntry> stacks;
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

}  // namespace mobs

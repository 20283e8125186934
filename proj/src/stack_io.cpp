#include "mobs/stack_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include "mobs/error.hpp"

namespace mobs {

namespace {

constexpr unsigned char kMagic[8] = {'M', 'O', 'B', 'S', 'S', 'T', 'K', 0x01};

void put_u32(unsigned char* p, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}

void put_u64(unsigned char* p, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}

std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

}  // namespace

std::vector<unsigned char> encode_stack(const ImageStack& stack) {
    std::vector<unsigned char> out(kStackHeaderBytes + 8 * stack.size());
    unsigned char* p = out.data();
    std::memcpy(p, kMagic, sizeof(kMagic));
    put_u32(p + 8, static_cast<std::uint32_t>(stack.nx()));
    put_u32(p + 12, static_cast<std::uint32_t>(stack.ny()));
    put_u32(p + 16, static_cast<std::uint32_t>(stack.nt()));
    put_u32(p + 20, kDtypeFloat64);
    put_u32(p + 24, static_cast<std::uint32_t>(stack.label()));
    put_u32(p + 28, 0);
    put_u64(p + 32, stack.seed());
    const auto data = stack.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
        put_u64(p + kStackHeaderBytes + 8 * i, std::bit_cast<std::uint64_t>(data[i]));
    }
    return out;
}

ImageStack decode_stack(const std::vector<unsigned char>& bytes, std::optional<Dims> expected) {
    if (bytes.size() < kStackHeaderBytes) throw FormatError("header", "truncated header");
    if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        throw FormatError("header", "bad magic");
    }
    const unsigned char* p = bytes.data();
    const Dims dims{get_u32(p + 8), get_u32(p + 12), get_u32(p + 16)};
    const std::uint32_t dtype = get_u32(p + 20);
    const std::uint32_t label = get_u32(p + 24);
    const std::uint32_t reserved = get_u32(p + 28);
    const std::uint64_t seed = get_u64(p + 32);

    if (dtype != kDtypeFloat64) throw FormatError("header", "unsupported dtype tag");
    if (label > 1) throw FormatError("header", "invalid label");
    if (reserved != 0) throw FormatError("header", "reserved field must be zero");
    if (dims.nx == 0 || dims.ny == 0 || dims.nt == 0) {
        throw FormatError("header", "zero dimension in header");
    }
    if (dims.nx != dims.ny) throw FormatError("dimension", "slices must be square");
    if (expected && *expected != dims) {
        throw FormatError("dimension", "stack dimensions do not match the expected size");
    }

    const std::size_t payload = bytes.size() - kStackHeaderBytes;
    if (payload < 8 * dims.size()) throw FormatError("payload", "truncated payload");
    if (payload > 8 * dims.size()) throw FormatError("payload", "trailing bytes after payload");

    std::vector<double> data(dims.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = std::bit_cast<double>(get_u64(p + kStackHeaderBytes + 8 * i));
    }
    return ImageStack(dims, std::move(data), static_cast<Label>(label), seed);
}

ImageStack read_stack(const std::filesystem::path& path, std::optional<Dims> expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("io", "cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return decode_stack(bytes, expected);
}

void write_stack(const ImageStack& stack, const std::filesystem::path& path) {
    const auto bytes = encode_stack(stack);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("io", "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("io", "write failed for " + path.string());
}

Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("io", "cannot open manifest " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
        Manifest m;
        m.master_seed = j.at("master_seed").get<std::uint64_t>();
        for (const auto& e : j.at("stacks")) {
            m.stacks.push_back({e.at("path").get<std::string>(),
                                parse_label(e.at("label").get<std::string>())});
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("manifest", e.what());
    }
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
    nlohmann::json j;
    j["master_seed"] = manifest.master_seed;
    j["stacks"] = nlohmann::json::array();
    for (const auto& e : manifest.stacks) {
        j["stacks"].push_back({{"path", e.path}, {"label", std::string(to_string(e.label))}});
    }
    std::ofstream out(path);
    if (!out) throw FormatError("io", "cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

}  // namespace mobs

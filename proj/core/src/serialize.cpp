#include "ccnet/serialize.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace ccnet {

namespace {

constexpr char kMagic[8] = {'C', 'C', 'N', 'E', 'T', 'M', 'D', 'L'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                 static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    out.write(b, 4);
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw FormatError("corrupt model file: truncated integer");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f32(std::ostream& out, float v) { write_u32(out, std::bit_cast<std::uint32_t>(v)); }
float read_f32(std::istream& in) { return std::bit_cast<float>(read_u32(in)); }

void write_f64(std::ostream& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    write_u32(out, static_cast<std::uint32_t>(bits & 0xFFFFFFFFULL));
    write_u32(out, static_cast<std::uint32_t>(bits >> 32));
}

double read_f64(std::istream& in) {
    std::uint64_t lo = read_u32(in);
    std::uint64_t hi = read_u32(in);
    return std::bit_cast<double>(lo | (hi << 32));
}

void write_string(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    std::uint32_t len = read_u32(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw FormatError("corrupt model file: truncated string");
    return s;
}

void write_f32_block(std::ostream& out, const std::vector<float>& v) {
    for (float x : v) write_f32(out, x);
}

void read_f32_block(std::istream& in, std::vector<float>& v) {
    for (float& x : v) x = read_f32(in);
}

} // namespace

void save_model(Model<float>& model, const std::string& path, bool include_velocities) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open model file for writing: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_u32(out, kVersion);

    const ModelConfig& cfg = model.config;
    out.put(static_cast<char>(cfg.variant));
    out.put(static_cast<char>(cfg.alphabet.case_mode()));
    write_u32(out, static_cast<std::uint32_t>(cfg.l0));
    write_u32(out, static_cast<std::uint32_t>(cfg.num_classes));
    write_f64(out, cfg.dropout_p);
    const auto& chars = cfg.alphabet.characters();
    write_u32(out, static_cast<std::uint32_t>(chars.size()));
    for (char32_t c : chars) write_u32(out, static_cast<std::uint32_t>(c));

    auto params = model.params();
    write_u32(out, static_cast<std::uint32_t>(params.size()));
    for (const auto& p : params) {
        write_string(out, p.name);
        write_u32(out, static_cast<std::uint32_t>(p.shape.size()));
        for (int d : p.shape) write_u32(out, static_cast<std::uint32_t>(d));
        write_f32_block(out, *p.value);
    }
    out.put(include_velocities ? '\1' : '\0');
    if (include_velocities)
        for (const auto& p : params) write_f32_block(out, *p.velocity);
    if (!out) throw FormatError("failed writing model file: " + path);
}

Model<float> load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open model file: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw FormatError("corrupt model file: bad magic");
    std::uint32_t version = read_u32(in);
    if (version != kVersion)
        throw FormatError("unsupported model format version " + std::to_string(version));

    ModelConfig cfg;
    int variant = in.get();
    int case_mode = in.get();
    if (variant < 0 || variant > 2 || case_mode < 0 || case_mode > 1)
        throw FormatError("corrupt model file: bad config bytes");
    cfg.variant = static_cast<Variant>(variant);
    cfg.l0 = static_cast<int>(read_u32(in));
    cfg.num_classes = static_cast<int>(read_u32(in));
    cfg.dropout_p = read_f64(in);
    std::uint32_t alpha_size = read_u32(in);
    std::vector<char32_t> chars(alpha_size);
    for (auto& c : chars) c = static_cast<char32_t>(read_u32(in));
    cfg.alphabet = Alphabet(std::move(chars), static_cast<CaseMode>(case_mode));

    // Rebuild the architecture from the config, then overwrite parameters.
    Model<float> model = build_model<float>(cfg, 0);
    auto params = model.params();
    std::uint32_t tensor_count = read_u32(in);
    if (tensor_count != params.size())
        throw FormatError("model file tensor count does not match architecture");
    for (auto& p : params) {
        std::string name = read_string(in);
        if (name != p.name)
            throw FormatError("model file tensor `" + name + "` does not match expected `" +
                              p.name + "`");
        std::uint32_t ndims = read_u32(in);
        if (ndims != p.shape.size())
            throw FormatError("tensor `" + name + "`: rank mismatch");
        for (int d : p.shape)
            if (read_u32(in) != static_cast<std::uint32_t>(d))
                throw FormatError("tensor `" + name + "`: shape mismatch vs config");
        read_f32_block(in, *p.value);
        if (!in) throw FormatError("corrupt model file: truncated tensor data");
    }
    int has_velocities = in.get();
    if (has_velocities == 1) {
        for (auto& p : params) {
            read_f32_block(in, *p.velocity);
            if (!in) throw FormatError("corrupt model file: truncated velocity data");
        }
    } else if (has_velocities != 0) {
        throw FormatError("corrupt model file: bad velocity marker");
    }
    if (in.peek() != std::char_traits<char>::eof())
        throw FormatError("corrupt model file: trailing bytes");
    return model;
}

} // namespace ccnet

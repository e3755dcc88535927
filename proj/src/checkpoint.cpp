// SPDX-License-Identifier: Apache-2.0
#include "swast/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "swast/errors.hpp"

namespace swast {

namespace {

constexpr char kMagic[4] = {'S', 'W', 'S', 'T'};

class Writer {
public:
    void u8(std::uint8_t v) { bytes.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void raw(const std::vector<std::uint8_t>& v) { bytes.insert(bytes.end(), v.begin(), v.end()); }
    void section(const Writer& body) {
        u64(body.bytes.size());
        raw(body.bytes);
    }

    std::vector<std::uint8_t> bytes;
};

class Reader {
public:
    Reader(const std::uint8_t* data, std::size_t size, std::uint64_t base) : data_(data), size_(size), base_(base) {}

    std::uint64_t offset() const { return base_ + pos_; }
    bool done() const { return pos_ == size_; }

    void need(std::size_t n, const char* what) const {
        if (size_ - pos_ < n) throw FormatError(std::string("truncated ") + what, offset());
    }
    std::uint8_t u8(const char* what) {
        need(1, what);
        return data_[pos_++];
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
        return v;
    }
    double f64(const char* what) { return std::bit_cast<double>(u64(what)); }

    // Count read from the stream, bounded by the bytes that remain so a
    // corrupted length cannot trigger a huge allocation.
    std::size_t count(const char* what, std::size_t bytes_per_item) {
        const std::uint64_t start = offset();
        const std::uint64_t n = u64(what);
        if (bytes_per_item && n > (size_ - pos_) / bytes_per_item)
            throw FormatError(std::string("implausible ") + what + " count", start);
        return static_cast<std::size_t>(n);
    }

    Reader section(const char* what) {
        const std::uint64_t start = offset();
        const std::uint64_t len = u64(what);
        if (len > size_ - pos_) throw FormatError(std::string("section length exceeds payload: ") + what, start);
        Reader sub(data_ + pos_, static_cast<std::size_t>(len), offset());
        pos_ += static_cast<std::size_t>(len);
        return sub;
    }

    void expect_end(const char* what) const {
        if (!done()) throw FormatError(std::string("trailing bytes in ") + what, offset());
    }

    std::string text(const char* what) {
        std::string s(reinterpret_cast<const char*>(data_ + pos_), size_ - pos_);
        (void)what;
        pos_ = size_;
        return s;
    }

private:
    const std::uint8_t* data_;
    std::size_t size_;
    std::uint64_t base_;
    std::size_t pos_ = 0;
};

std::uint32_t crc_of(const std::uint8_t* data, std::size_t n) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed large buffers in chunks.
    while (n > 0) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
        crc = crc32(crc, data, chunk);
        data += chunk;
        n -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

Writer encode_model(const SparseModel& m) {
    Writer w;
    w.u32(static_cast<std::uint32_t>(m.layer_count()));
    w.u8(m.prune_scope() == PruneScope::FcOnly ? 0 : 1);
    for (const auto& l : m.layers()) {
        w.u64(l.out());
        w.u64(l.in());
        for (double v : l.weight.data) w.f64(v);
        for (double v : l.bias) w.f64(v);
        std::uint8_t byte = 0;
        for (std::size_t i = 0; i < l.mask.size(); ++i) {
            if (l.mask[i]) byte |= static_cast<std::uint8_t>(1u << (i % 8));
            if (i % 8 == 7 || i + 1 == l.mask.size()) {
                w.u8(byte);
                byte = 0;
            }
        }
    }
    return w;
}

SparseModel decode_model(Reader r) {
    const std::uint64_t at = r.offset();
    const std::uint32_t n = r.u32("layer count");
    const std::uint8_t scope = r.u8("scope");
    if (scope > 1) throw FormatError("unknown prune scope", r.offset() - 1);
    std::vector<SparseLayer> layers;
    for (std::uint32_t li = 0; li < n; ++li) {
        const std::uint64_t out = r.u64("layer rows");
        const std::uint64_t in = r.u64("layer cols");
        if (out == 0 || in == 0 || out > (1u << 24) || in > (1u << 24))
            throw FormatError("implausible layer shape", r.offset() - 16);
        const std::size_t cells = static_cast<std::size_t>(out * in);
        r.need(cells * 8 + out * 8 + (cells + 7) / 8, "layer body");
        SparseLayer l;
        l.weight = Tensor2(out, in);
        for (auto& v : l.weight.data) v = r.f64("weights");
        l.bias.resize(out);
        for (auto& v : l.bias) v = r.f64("biases");
        l.mask.assign(cells, 0);
        for (std::size_t i = 0; i < cells; i += 8) {
            const std::uint8_t byte = r.u8("mask");
            for (std::size_t b = 0; b < 8 && i + b < cells; ++b) l.mask[i + b] = (byte >> b) & 1u;
        }
        layers.push_back(std::move(l));
    }
    r.expect_end("model section");
    try {
        return SparseModel(std::move(layers), scope == 0 ? PruneScope::FcOnly : PruneScope::FullNetwork);
    } catch (const InvalidInput& e) {
        throw FormatError(std::string("inconsistent model: ") + e.what(), at);
    }
}

Writer encode_optimizer(const SgdState& s) {
    Writer w;
    w.u64(s.weight_momentum.size());
    for (std::size_t i = 0; i < s.weight_momentum.size(); ++i) {
        w.u64(s.weight_momentum[i].size());
        for (double v : s.weight_momentum[i]) w.f64(v);
        w.u64(s.bias_momentum[i].size());
        for (double v : s.bias_momentum[i]) w.f64(v);
    }
    return w;
}

SgdState decode_optimizer(Reader r, const SparseModel& m) {
    const std::uint64_t at = r.offset();
    SgdState s;
    const std::size_t n = r.count("optimizer layers", 16);
    if (n != m.layer_count()) throw FormatError("optimizer layer count does not match model", at);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> w(r.count("weight momentum", 8));
        for (auto& v : w) v = r.f64("weight momentum");
        std::vector<double> b(r.count("bias momentum", 8));
        for (auto& v : b) v = r.f64("bias momentum");
        if (w.size() != m.layer(i).weight.size() || b.size() != m.layer(i).bias.size())
            throw FormatError("optimizer buffer shape does not match model", at);
        s.weight_momentum.push_back(std::move(w));
        s.bias_momentum.push_back(std::move(b));
    }
    r.expect_end("optimizer section");
    return s;
}

Writer encode_coreset(const CoresetState& c) {
    Writer w;
    w.f64(c.alpha);
    w.u64(c.indices.size());
    for (auto i : c.indices) w.u64(i);
    for (double v : c.weights) w.f64(v);
    return w;
}

CoresetState decode_coreset(Reader r) {
    CoresetState c;
    c.alpha = r.f64("coreset alpha");
    const std::size_t n = r.count("coreset", 16);
    c.indices.resize(n);
    for (auto& i : c.indices) i = static_cast<std::size_t>(r.u64("coreset index"));
    c.weights.resize(n);
    for (auto& v : c.weights) v = r.f64("coreset weight");
    r.expect_end("coreset section");
    return c;
}

Writer encode_preserved(const std::optional<PreservedState>& p) {
    Writer w;
    w.u8(p ? 1 : 0);
    w.u64(p ? p->logits.size() : 0);
    if (p) {
        for (const auto& [id, z] : p->logits) {
            w.u64(id);
            w.u64(z.size());
            for (double v : z) w.f64(v);
        }
    }
    return w;
}

std::optional<PreservedState> decode_preserved(Reader r) {
    const std::uint64_t at = r.offset();
    const std::uint8_t present = r.u8("preserved flag");
    if (present > 1) throw FormatError("bad preserved flag", at);
    const std::size_t n = r.count("preserved entries", 16);
    std::optional<PreservedState> out;
    if (present) out.emplace();
    else if (n != 0) throw FormatError("preserved entries without presence flag", at);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t id_at = r.offset();
        const auto id = static_cast<std::size_t>(r.u64("preserved id"));
        std::vector<double> z(r.count("preserved logits", 8));
        for (auto& v : z) v = r.f64("preserved logit");
        if (!out->logits.emplace(id, std::move(z)).second) throw FormatError("duplicate preserved id", id_at);
    }
    r.expect_end("preserved section");
    return out;
}

} // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
    const TrainingState& s = ckpt.state;
    Writer payload;
    payload.section(encode_model(s.model));
    payload.section(encode_optimizer(s.optimizer));
    payload.section(encode_coreset(s.coreset));
    payload.section(encode_preserved(s.preserved));
    Writer rng;
    const std::string text = s.rng.state();
    rng.bytes.assign(text.begin(), text.end());
    payload.section(rng);
    Writer counters;
    counters.u64(s.epoch);
    counters.u64(s.step);
    payload.section(counters);

    Writer out;
    for (char c : kMagic) out.u8(static_cast<std::uint8_t>(c));
    out.u32(ckpt.version);
    out.raw(payload.bytes);
    out.u32(crc_of(payload.bytes.data(), payload.bytes.size()));
    return out.bytes;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 12) throw FormatError("checkpoint shorter than header and trailer", bytes.size());
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad checkpoint magic", 0);
    Reader head(bytes.data() + 4, 4, 4);
    const std::uint32_t version = head.u32("version");
    if (version != kCheckpointVersion)
        throw UnsupportedVersion("checkpoint version " + std::to_string(version) + " (expected " +
                                 std::to_string(kCheckpointVersion) + ")");
    const std::size_t payload_size = bytes.size() - 12;
    Reader tail(bytes.data() + bytes.size() - 4, 4, bytes.size() - 4);
    const std::uint32_t stored = tail.u32("crc");
    if (crc_of(bytes.data() + 8, payload_size) != stored) throw CorruptionError("checkpoint CRC mismatch");

    Reader r(bytes.data() + 8, payload_size, 8);
    Checkpoint ck;
    ck.version = version;
    TrainingState& s = ck.state;
    s.model = decode_model(r.section("model"));
    s.optimizer = decode_optimizer(r.section("optimizer"), s.model);
    s.coreset = decode_coreset(r.section("coreset"));
    s.preserved = decode_preserved(r.section("preserved"));
    Reader rng = r.section("rng");
    const std::uint64_t rng_at = rng.offset();
    try {
        s.rng.restore(rng.text("rng"));
    } catch (const std::exception& e) {
        throw FormatError(std::string("bad rng state: ") + e.what(), rng_at);
    }
    Reader counters = r.section("counters");
    s.epoch = counters.u64("epoch");
    s.step = counters.u64("step");
    counters.expect_end("counters section");
    r.expect_end("payload");
    return ck;
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        f.flush();
        if (!f) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
    }
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    const auto bytes = encode_checkpoint(ckpt);
    write_file_atomic(path, std::string(bytes.begin(), bytes.end()));
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open checkpoint " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

} // namespace swast

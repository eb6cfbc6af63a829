#include "semcom/packetizer.hpp"

#include <algorithm>
#include <cstring>

#include "semcom/errors.hpp"

namespace semcom {

void PacketLayout::validate() const {
    if (patch_w <= 0 || patch_h <= 0 || feat_w <= 0 || feat_h <= 0 || feat_c <= 0)
        throw config_error("PacketLayout: dims must be positive");
    if (bits < 1 || bits > 16)
        throw config_error("PacketLayout: bits must be in [1, 16]");
    if (feat_w % patch_w != 0 || feat_h % patch_h != 0)
        throw config_error("PacketLayout: patch dims must divide feature dims");
}

namespace {

class BitWriter {
  public:
    explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

    void put(std::uint32_t value, int bits) {
        for (int b = bits - 1; b >= 0; --b) push_bit((value >> b) & 1u);
    }

    void flush() {
        if (fill_ > 0) {
            out_.push_back(static_cast<std::uint8_t>(cur_ << (8 - fill_)));
            cur_ = 0;
            fill_ = 0;
        }
    }

  private:
    void push_bit(std::uint32_t bit) {
        cur_ = static_cast<std::uint8_t>((cur_ << 1) | bit);
        if (++fill_ == 8) {
            out_.push_back(cur_);
            cur_ = 0;
            fill_ = 0;
        }
    }

    std::vector<std::uint8_t>& out_;
    std::uint8_t cur_ = 0;
    int fill_ = 0;
};

class BitReader {
  public:
    BitReader(const std::vector<std::uint8_t>& in, int bit_count)
        : in_(in), bit_count_(bit_count) {}

    std::uint32_t get(int bits) {
        std::uint32_t v = 0;
        for (int b = 0; b < bits; ++b) {
            if (pos_ >= bit_count_) throw data_error("packet payload underrun");
            const int byte = pos_ >> 3;
            const int off = 7 - (pos_ & 7);
            v = (v << 1) | ((in_[byte] >> off) & 1u);
            ++pos_;
        }
        return v;
    }

  private:
    const std::vector<std::uint8_t>& in_;
    int bit_count_;
    int pos_ = 0;
};

}  // namespace

std::vector<Packet> packetize(const IndexTensor& codes, const PacketLayout& layout) {
    layout.validate();
    if (codes.width != layout.feat_w || codes.height != layout.feat_h ||
        codes.channels != layout.feat_c)
        throw config_error("packetize: code tensor shape does not match layout");
    const std::uint32_t max_code = (1u << layout.bits) - 1;
    std::vector<Packet> packets;
    packets.reserve(layout.num_packets());
    for (int pi = 0; pi < layout.patches_x(); ++pi) {
        for (int pj = 0; pj < layout.patches_y(); ++pj) {
            Packet p;
            p.index = layout.packet_index(pi, pj);
            p.patch_i = pi;
            p.patch_j = pj;
            p.payload_bits = layout.payload_bits();
            p.payload.reserve((p.payload_bits + 7) / 8);
            BitWriter w(p.payload);
            for (int c = 0; c < layout.feat_c; ++c)
                for (int a = 0; a < layout.patch_w; ++a)
                    for (int d = 0; d < layout.patch_h; ++d) {
                        const std::uint32_t code =
                            codes.at(pi * layout.patch_w + a,
                                     pj * layout.patch_h + d, c);
                        if (code > max_code)
                            throw data_error("packetize: code does not fit in R bits");
                        w.put(code, layout.bits);
                    }
            w.flush();
            packets.push_back(std::move(p));
        }
    }
    return packets;
}

DepacketizeResult depacketize(const std::vector<Packet>& packets,
                              const std::vector<int>& lost,
                              const PacketLayout& layout,
                              const QuantizationCodebook& cb,
                              const FeatureTensor& fill) {
    layout.validate();
    const int n = layout.num_packets();
    if (fill.width != layout.feat_w || fill.height != layout.feat_h ||
        fill.channels != layout.feat_c)
        throw config_error("depacketize: fill tensor shape does not match layout");
    if (cb.bits != layout.bits)
        throw config_error("depacketize: codebook bits do not match layout");

    std::vector<const Packet*> by_index(n, nullptr);
    for (const Packet& p : packets) {
        if (p.index < 0 || p.index >= n)
            throw data_error("depacketize: packet index out of range");
        if (by_index[p.index] != nullptr)
            throw data_error("depacketize: duplicate packet index");
        by_index[p.index] = &p;
    }
    for (int i = 0; i < n; ++i)
        if (by_index[i] == nullptr)
            throw data_error("depacketize: missing packet");

    std::vector<std::uint8_t> is_lost(n, 0);
    for (int idx : lost) {
        if (idx < 0 || idx >= n)
            throw config_error("depacketize: lost index out of range");
        is_lost[idx] = 1;
    }

    DepacketizeResult res;
    res.values = FeatureTensor(layout.feat_w, layout.feat_h, layout.feat_c);
    for (int idx = 0; idx < n; ++idx)
        if (is_lost[idx]) res.report.lost.push_back(idx);

    for (int idx = 0; idx < n; ++idx) {
        const Packet& p = *by_index[idx];
        const int pi = p.patch_i;
        const int pj = p.patch_j;
        if (layout.packet_index(pi, pj) != idx)
            throw data_error("depacketize: packet origin inconsistent with index");
        if (is_lost[idx]) {
            for (int a = 0; a < layout.patch_w; ++a)
                for (int d = 0; d < layout.patch_h; ++d)
                    for (int c = 0; c < layout.feat_c; ++c) {
                        const int i = pi * layout.patch_w + a;
                        const int j = pj * layout.patch_h + d;
                        res.values.at(i, j, c) = fill.at(i, j, c);
                        res.report.erased.push_back({i, j, c});
                    }
            continue;
        }
        if (p.payload_bits != layout.payload_bits())
            throw data_error("depacketize: payload bit count does not match layout");
        BitReader r(p.payload, p.payload_bits);
        for (int c = 0; c < layout.feat_c; ++c)
            for (int a = 0; a < layout.patch_w; ++a)
                for (int d = 0; d < layout.patch_h; ++d) {
                    const std::uint32_t code = r.get(layout.bits);
                    if (static_cast<int>(code) >= cb.num_levels())
                        throw data_error("depacketize: decoded code out of range");
                    res.values.at(pi * layout.patch_w + a, pj * layout.patch_h + d,
                                  c) = cb.level(static_cast<int>(code));
                }
    }
    return res;
}

bool erasure_locality_check(const ErasureReport& report, const PacketLayout& layout) {
    layout.validate();
    std::vector<std::uint8_t> flag(
        static_cast<std::size_t>(layout.feat_w) * layout.feat_h * layout.feat_c, 0);
    std::size_t distinct = 0;
    for (const Position& p : report.erased) {
        if (p.i < 0 || p.i >= layout.feat_w || p.j < 0 || p.j >= layout.feat_h ||
            p.c < 0 || p.c >= layout.feat_c)
            return false;
        std::size_t f =
            (static_cast<std::size_t>(p.i) * layout.feat_h + p.j) * layout.feat_c +
            p.c;
        if (!flag[f]) {
            flag[f] = 1;
            ++distinct;
        }
    }
    const std::size_t block = static_cast<std::size_t>(layout.patch_w) *
                              layout.patch_h * layout.feat_c;
    std::size_t covered = 0;
    for (int pi = 0; pi < layout.patches_x(); ++pi)
        for (int pj = 0; pj < layout.patches_y(); ++pj) {
            std::size_t count = 0;
            for (int a = 0; a < layout.patch_w; ++a)
                for (int d = 0; d < layout.patch_h; ++d)
                    for (int c = 0; c < layout.feat_c; ++c)
                        count += flag[(static_cast<std::size_t>(pi * layout.patch_w +
                                                                a) *
                                           layout.feat_h +
                                       (pj * layout.patch_h + d)) *
                                          layout.feat_c +
                                      c];
            if (count != 0 && count != block) return false;
            covered += count;
        }
    return covered == distinct;
}

void write_packet(std::string& out, const Packet& p) {
    auto put_u32 = [&out](std::uint32_t v) {
        char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff),
                     static_cast<char>((v >> 24) & 0xff)};
        out.append(b, 4);
    };
    put_u32(static_cast<std::uint32_t>(p.index));
    put_u32(static_cast<std::uint32_t>(p.payload_bits));
    out.append(reinterpret_cast<const char*>(p.payload.data()), p.payload.size());
}

Packet read_packet(const std::string& buf, std::size_t& offset,
                   const PacketLayout& layout) {
    auto get_u32 = [&buf, &offset]() {
        if (offset + 4 > buf.size()) throw data_error("read_packet: truncated header");
        std::uint32_t v = 0;
        std::memcpy(&v, buf.data() + offset, 4);
        offset += 4;
        return v;
    };
    Packet p;
    p.index = static_cast<int>(get_u32());
    p.payload_bits = static_cast<int>(get_u32());
    const std::size_t bytes = (static_cast<std::size_t>(p.payload_bits) + 7) / 8;
    if (offset + bytes > buf.size()) throw data_error("read_packet: truncated payload");
    p.payload.assign(buf.begin() + offset, buf.begin() + offset + bytes);
    offset += bytes;
    if (p.index < 0 || p.index >= layout.num_packets())
        throw data_error("read_packet: index out of range");
    p.patch_i = p.index / layout.patches_y();
    p.patch_j = p.index % layout.patches_y();
    return p;
}

}  // namespace semcom

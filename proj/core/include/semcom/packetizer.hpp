#ifndef SEMCOM_PACKETIZER_HPP
#define SEMCOM_PACKETIZER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "semcom/quantizer.hpp"
#include "semcom/tensor.hpp"

namespace semcom {

/// Patch-grid packetization geometry. Each packet carries one spatial patch
/// of W_z x H_z positions across all feature channels, so a packet loss
/// erases a channel-complete spatial block.
struct PacketLayout {
    int patch_w = 0;   // W_z
    int patch_h = 0;   // H_z
    int feat_w = 0;    // W_y
    int feat_h = 0;    // H_y
    int feat_c = 0;    // C_y
    int bits = 0;      // R, bits per element

    int patches_x() const { return feat_w / patch_w; }
    int patches_y() const { return feat_h / patch_h; }
    int num_packets() const { return patches_x() * patches_y(); }     // N
    int payload_bits() const { return patch_w * patch_h * feat_c * bits; }  // K

    /// Packet transmission order is row-major over the patch grid.
    int packet_index(int pi, int pj) const { return pi * patches_y() + pj; }

    void validate() const;
};

/// One fixed-length packet: patch origin in patch-grid coordinates plus the
/// serialized payload (R-bit codes, MSB first, channel-major then row-major
/// within the patch; final byte zero-padded).
struct Packet {
    int index = 0;
    int patch_i = 0;
    int patch_j = 0;
    int payload_bits = 0;
    std::vector<std::uint8_t> payload;
};

/// Which packets were lost and exactly which feature positions that erased.
struct ErasureReport {
    std::vector<int> lost;             // packet indices, ascending
    std::vector<Position> erased;      // the position set P
};

struct DepacketizeResult {
    FeatureTensor values;   // dequantized survivors, fill elsewhere
    ErasureReport report;
};

/// Serializes quantizer codes into the packet sequence.
std::vector<Packet> packetize(const IndexTensor& codes, const PacketLayout& layout);

/// Reassembles the feature tensor. Positions covered by surviving packets
/// carry dequantized payload values; positions of lost packets take the
/// corresponding entries of `fill`. Duplicate packet indices are rejected.
DepacketizeResult depacketize(const std::vector<Packet>& packets,
                              const std::vector<int>& lost,
                              const PacketLayout& layout,
                              const QuantizationCodebook& cb,
                              const FeatureTensor& fill);

/// True iff the erased position set is exactly a union of whole
/// patch x all-channel blocks.
bool erasure_locality_check(const ErasureReport& report, const PacketLayout& layout);

/// Packet wire format: uint32 index, uint32 payload bit count, payload bytes.
void write_packet(std::string& out, const Packet& p);
Packet read_packet(const std::string& buf, std::size_t& offset, const PacketLayout& layout);

}  // namespace semcom

#endif

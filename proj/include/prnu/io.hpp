#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "prnu/image.hpp"

namespace prnu {

// ---- images ----------------------------------------------------------

// Decodes an 8-bit PNM (P2/P5 graymap, P3/P6 pixmap) or PNG raster to a
// luminance matrix. RGB converts via ITU-R 601 weights 0.299/0.587/0.114.
Image load_image(const std::filesystem::path& path);

// Writes an 8-bit binary PGM; values are rounded and clamped to [0,255].
void save_pgm(const Image& img, const std::filesystem::path& path);

// ---- manifests --------------------------------------------------------

enum class Role { Estimation, Query, Holdout };

std::string role_name(Role r);
Role parse_role(const std::string& s);

struct ManifestEntry {
    std::string path;
    Role role = Role::Estimation;
    std::string label; // optional
};

struct DatasetManifest {
    std::string source_note;
    std::vector<ManifestEntry> entries;

    std::vector<std::size_t> entries_with_role(Role r) const;
};

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& m, const std::filesystem::path& path);

// ---- fingerprint bundles ----------------------------------------------

struct FingerprintBundle {
    Image k_hat;
    std::optional<Image> r; // sum of Xhat o Xhat; required by the NP detector
    std::uint32_t l = 0;    // images used in the estimate
    bool zero_meaned = false;
    bool dft_wienered = false;
    bool whitened = false;
    std::string denoiser_id;
    std::optional<std::uint64_t> creation_seed;

    bool operator==(const FingerprintBundle& o) const = default;
};

// Binary little-endian format:
//   "PRNU" 0x01 | u32 M | u32 N | u32 L | u8 flags | u8 has_R | u8 has_seed
//   | u8 reserved | u16 id_len + id bytes | [u64 seed] | M*N f64 K_hat
//   | [M*N f64 R]
// flags: bit0 zero_meaned, bit1 dft_wiener, bit2 whitened.
// Round-trips are bit-exact on every field including all f64 payload bits.
void save_bundle(const FingerprintBundle& b, const std::filesystem::path& path);
FingerprintBundle load_bundle(const std::filesystem::path& path);

} // namespace prnu

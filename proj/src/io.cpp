#include "prnu/io.hpp"

#include <png.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace prnu {

namespace {

constexpr double kRedWeight = 0.299, kGreenWeight = 0.587, kBlueWeight = 0.114;

double luminance(double r, double g, double b) {
    return kRedWeight * r + kGreenWeight * g + kBlueWeight * b;
}

// ---- PNM ---------------------------------------------------------------

// Reads the next PNM header token, skipping whitespace and '#' comments.
std::string pnm_token(std::istream& in) {
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {}
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    if (tok.empty()) throw DataError("pnm: truncated header");
    return tok;
}

long pnm_int(std::istream& in) {
    const std::string tok = pnm_token(in);
    try {
        return std::stol(tok);
    } catch (const std::exception&) {
        throw DataError("pnm: malformed header value '" + tok + "'");
    }
}

Image load_pnm(std::istream& in, const std::string& magic) {
    const bool color = magic == "P3" || magic == "P6";
    const bool binary = magic == "P5" || magic == "P6";
    const long cols = pnm_int(in), rows = pnm_int(in), maxval = pnm_int(in);
    if (cols < 1 || rows < 1) throw DataError("pnm: zero-sized image");
    if (maxval != 255) throw DataError("pnm: unsupported bit depth (maxval " +
                                       std::to_string(maxval) + ", expected 255)");
    const std::size_t samples =
        static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * (color ? 3 : 1);
    std::vector<double> raw(samples);
    if (binary) {
        std::vector<unsigned char> buf(samples);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(samples));
        if (static_cast<std::size_t>(in.gcount()) != samples)
            throw DataError("pnm: truncated pixel data");
        for (std::size_t i = 0; i < samples; ++i) raw[i] = buf[i];
    } else {
        for (std::size_t i = 0; i < samples; ++i) {
            const long v = pnm_int(in);
            if (v < 0 || v > maxval) throw DataError("pnm: sample out of range");
            raw[i] = static_cast<double>(v);
        }
    }
    std::vector<double> data(static_cast<std::size_t>(rows) * cols);
    if (color) {
        for (std::size_t i = 0; i < data.size(); ++i)
            data[i] = luminance(raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]);
    } else {
        data = std::move(raw);
    }
    return Image::from_data(static_cast<int>(rows), static_cast<int>(cols), std::move(data));
}

// ---- PNG ---------------------------------------------------------------

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    }
};

Image load_png(std::FILE* fp, const std::filesystem::path& path) {
    PngReader ctx;
    ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!ctx.png) throw DataError("png: failed to initialize reader");
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.info) throw DataError("png: failed to initialize reader");
    if (setjmp(png_jmpbuf(ctx.png))) throw DataError("png: corrupt file " + path.string());

    png_init_io(ctx.png, fp);
    png_read_info(ctx.png, ctx.info);

    const png_uint_32 cols = png_get_image_width(ctx.png, ctx.info);
    const png_uint_32 rows = png_get_image_height(ctx.png, ctx.info);
    const int bit_depth = png_get_bit_depth(ctx.png, ctx.info);
    const int color_type = png_get_color_type(ctx.png, ctx.info);
    if (cols < 1 || rows < 1) throw DataError("png: zero-sized image");
    if (bit_depth == 16) throw DataError("png: unsupported bit depth 16");

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(ctx.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(ctx.png);
    if (png_get_valid(ctx.png, ctx.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(ctx.png);
    png_set_strip_alpha(ctx.png);
    png_set_interlace_handling(ctx.png);
    png_read_update_info(ctx.png, ctx.info);

    const int channels = png_get_channels(ctx.png, ctx.info);
    if (channels != 1 && channels != 3)
        throw DataError("png: unsupported channel count " + std::to_string(channels));

    const std::size_t stride = png_get_rowbytes(ctx.png, ctx.info);
    std::vector<unsigned char> pixels(stride * rows);
    std::vector<png_bytep> row_ptrs(rows);
    for (png_uint_32 r = 0; r < rows; ++r) row_ptrs[r] = pixels.data() + r * stride;
    png_read_image(ctx.png, row_ptrs.data());
    png_read_end(ctx.png, nullptr);

    std::vector<double> data(static_cast<std::size_t>(rows) * cols);
    for (png_uint_32 r = 0; r < rows; ++r) {
        const unsigned char* src = pixels.data() + r * stride;
        for (png_uint_32 c = 0; c < cols; ++c) {
            if (channels == 1) {
                data[static_cast<std::size_t>(r) * cols + c] = src[c];
            } else {
                data[static_cast<std::size_t>(r) * cols + c] =
                    luminance(src[3 * c], src[3 * c + 1], src[3 * c + 2]);
            }
        }
    }
    return Image::from_data(static_cast<int>(rows), static_cast<int>(cols), std::move(data));
}

// ---- little-endian scalar IO -------------------------------------------

void put_bytes(std::string& out, std::uint64_t v, int nbytes) {
    for (int i = 0; i < nbytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class ByteReader {
public:
    ByteReader(const unsigned char* p, std::size_t n) : p_(p), n_(n) {}
    std::uint64_t take(int nbytes) {
        if (pos_ + static_cast<std::size_t>(nbytes) > n_)
            throw DataError("bundle: truncated payload");
        std::uint64_t v = 0;
        for (int i = 0; i < nbytes; ++i)
            v |= static_cast<std::uint64_t>(p_[pos_ + i]) << (8 * i);
        pos_ += static_cast<std::size_t>(nbytes);
        return v;
    }
    std::string take_string(std::size_t len) {
        if (pos_ + len > n_) throw DataError("bundle: truncated payload");
        std::string s(reinterpret_cast<const char*>(p_ + pos_), len);
        pos_ += len;
        return s;
    }
    std::size_t remaining() const { return n_ - pos_; }

private:
    const unsigned char* p_;
    std::size_t n_;
    std::size_t pos_ = 0;
};

std::uint64_t f64_bits(double d) {
    std::uint64_t u;
    std::memcpy(&u, &d, 8);
    return u;
}

double bits_f64(std::uint64_t u) {
    double d;
    std::memcpy(&d, &u, 8);
    return d;
}

} // namespace

Image load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open image file " + path.string());
    char magic[8] = {};
    in.read(magic, 8);
    const std::streamsize got = in.gcount();
    in.clear();
    in.seekg(0);
    if (got >= 2 && magic[0] == 'P' && magic[1] >= '2' && magic[1] <= '6') {
        std::string m = pnm_token(in);
        if (m == "P2" || m == "P3" || m == "P5" || m == "P6") return load_pnm(in, m);
        throw DataError("pnm: unsupported format " + m + " in " + path.string());
    }
    static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    if (got >= 8 && std::memcmp(magic, png_sig, 8) == 0) {
        std::FILE* fp = std::fopen(path.string().c_str(), "rb");
        if (!fp) throw DataError("cannot open image file " + path.string());
        try {
            Image img = load_png(fp, path);
            std::fclose(fp);
            return img;
        } catch (...) {
            std::fclose(fp);
            throw;
        }
    }
    throw DataError("unrecognized image format: " + path.string());
}

void save_pgm(const Image& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << "P5\n" << img.cols() << " " << img.rows() << "\n255\n";
    std::vector<unsigned char> buf(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        double v = std::round(img[i]);
        if (v < 0.0) v = 0.0;
        if (v > 255.0) v = 255.0;
        buf[i] = static_cast<unsigned char>(v);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw DataError("short write to " + path.string());
}

std::string role_name(Role r) {
    switch (r) {
    case Role::Estimation: return "estimation";
    case Role::Query: return "query";
    case Role::Holdout: return "holdout";
    }
    return "?";
}

Role parse_role(const std::string& s) {
    if (s == "estimation") return Role::Estimation;
    if (s == "query") return Role::Query;
    if (s == "holdout") return Role::Holdout;
    throw DataError("manifest: unknown role '" + s + "'");
}

std::vector<std::size_t> DatasetManifest::entries_with_role(Role r) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < entries.size(); ++i)
        if (entries[i].role == r) idx.push_back(i);
    return idx;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("manifest: invalid JSON: " + std::string(e.what()));
    }
    DatasetManifest m;
    m.source_note = j.value("source_note", std::string{});
    if (!j.contains("entries") || !j["entries"].is_array() || j["entries"].empty())
        throw DataError("manifest: empty or missing entries");
    std::set<std::string> seen;
    for (const auto& e : j["entries"]) {
        ManifestEntry entry;
        if (!e.contains("path") || !e["path"].is_string())
            throw DataError("manifest: entry missing path");
        entry.path = e["path"].get<std::string>();
        if (!seen.insert(entry.path).second)
            throw DataError("manifest: duplicate path '" + entry.path + "'");
        if (!e.contains("role") || !e["role"].is_string())
            throw DataError("manifest: entry missing role");
        entry.role = parse_role(e["role"].get<std::string>());
        entry.label = e.value("label", std::string{});
        m.entries.push_back(std::move(entry));
    }
    return m;
}

void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
    nlohmann::json j;
    j["source_note"] = m.source_note;
    j["entries"] = nlohmann::json::array();
    for (const ManifestEntry& e : m.entries) {
        nlohmann::json je;
        je["path"] = e.path;
        je["role"] = role_name(e.role);
        if (!e.label.empty()) je["label"] = e.label;
        j["entries"].push_back(std::move(je));
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write manifest " + path.string());
    out << j.dump(2) << "\n";
}

void save_bundle(const FingerprintBundle& b, const std::filesystem::path& path) {
    if (b.k_hat.empty()) throw DataError("bundle: empty fingerprint");
    if (b.r && !b.r->same_shape(b.k_hat)) throw DataError("bundle: R shape differs from K_hat");
    if (b.denoiser_id.size() > 0xFFFF) throw DataError("bundle: denoiser_id too long");

    std::string out;
    out.reserve(32 + b.k_hat.size() * 8 * (b.r ? 2 : 1));
    out += "PRNU";
    out.push_back(0x01);
    put_bytes(out, static_cast<std::uint32_t>(b.k_hat.rows()), 4);
    put_bytes(out, static_cast<std::uint32_t>(b.k_hat.cols()), 4);
    put_bytes(out, b.l, 4);
    const std::uint8_t flags = static_cast<std::uint8_t>((b.zero_meaned ? 1 : 0) |
                                                         (b.dft_wienered ? 2 : 0) |
                                                         (b.whitened ? 4 : 0));
    out.push_back(static_cast<char>(flags));
    out.push_back(b.r ? 1 : 0);
    out.push_back(b.creation_seed ? 1 : 0);
    out.push_back(0); // reserved
    put_bytes(out, b.denoiser_id.size(), 2);
    out += b.denoiser_id;
    if (b.creation_seed) put_bytes(out, *b.creation_seed, 8);
    for (std::size_t i = 0; i < b.k_hat.size(); ++i) put_bytes(out, f64_bits(b.k_hat[i]), 8);
    if (b.r)
        for (std::size_t i = 0; i < b.r->size(); ++i) put_bytes(out, f64_bits((*b.r)[i]), 8);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write bundle " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("short write to " + path.string());
}

FingerprintBundle load_bundle(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open bundle " + path.string());
    std::string blob((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    ByteReader rd(reinterpret_cast<const unsigned char*>(blob.data()), blob.size());

    if (rd.take_string(4) != "PRNU") throw DataError("bundle: bad magic");
    const std::uint64_t version = rd.take(1);
    if (version != 1) throw DataError("bundle: unsupported version " + std::to_string(version));
    const std::uint64_t rows = rd.take(4), cols = rd.take(4), l = rd.take(4);
    if (rows < 1 || cols < 1 || rows > 1'000'000 || cols > 1'000'000 ||
        rows * cols > 500'000'000ull)
        throw DataError("bundle: dimension overflow");
    const std::uint64_t flags = rd.take(1);
    if (flags > 7) throw DataError("bundle: unknown postprocess flags");
    const bool has_r = rd.take(1) != 0;
    const bool has_seed = rd.take(1) != 0;
    rd.take(1); // reserved
    const std::size_t id_len = static_cast<std::size_t>(rd.take(2));

    FingerprintBundle b;
    b.l = static_cast<std::uint32_t>(l);
    b.zero_meaned = (flags & 1) != 0;
    b.dft_wienered = (flags & 2) != 0;
    b.whitened = (flags & 4) != 0;
    b.denoiser_id = rd.take_string(id_len);
    if (has_seed) b.creation_seed = rd.take(8);

    const std::size_t npix = static_cast<std::size_t>(rows * cols);
    std::vector<double> k(npix);
    for (std::size_t i = 0; i < npix; ++i) k[i] = bits_f64(rd.take(8));
    b.k_hat = Image::from_data(static_cast<int>(rows), static_cast<int>(cols), std::move(k));
    if (has_r) {
        std::vector<double> r(npix);
        for (std::size_t i = 0; i < npix; ++i) r[i] = bits_f64(rd.take(8));
        b.r = Image::from_data(static_cast<int>(rows), static_cast<int>(cols), std::move(r));
    }
    if (rd.remaining() != 0) throw DataError("bundle: payload size mismatch");
    return b;
}

} // namespace prnu

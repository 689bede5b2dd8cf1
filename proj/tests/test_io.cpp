#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "prnu/io.hpp"
#include "prnu/rng.hpp"

using namespace prnu;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "prnu_test_io";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

void write_file(const fs::path& p, const std::string& bytes) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void write_rgb_png(const fs::path& path, int rows, int cols, unsigned char r, unsigned char g,
                   unsigned char b) {
    std::FILE* fp = std::fopen(path.string().c_str(), "wb");
    REQUIRE(fp != nullptr);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    REQUIRE(setjmp(png_jmpbuf(png)) == 0);
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(cols), static_cast<png_uint_32>(rows), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<unsigned char> row(static_cast<std::size_t>(cols) * 3);
    for (int c = 0; c < cols; ++c) {
        row[3 * static_cast<std::size_t>(c)] = r;
        row[3 * static_cast<std::size_t>(c) + 1] = g;
        row[3 * static_cast<std::size_t>(c) + 2] = b;
    }
    for (int y = 0; y < rows; ++y) png_write_row(png, row.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

FingerprintBundle random_bundle(std::uint64_t seed) {
    SequentialRng rng(seed, kStreamTrial);
    const int rows = 1 + static_cast<int>(rng.below(64));
    const int cols = 1 + static_cast<int>(rng.below(64));
    FingerprintBundle b;
    b.k_hat = Image(rows, cols);
    const RandomStream vals(seed, kStreamTexture);
    for (std::size_t i = 0; i < b.k_hat.size(); ++i) {
        switch (vals.bits(3 * i) % 5) {
        case 0: b.k_hat[i] = vals.gaussian(3 * i + 1); break;
        case 1: b.k_hat[i] = -0.0; break;
        case 2: b.k_hat[i] = 5e-324; break; // smallest denormal
        case 3: b.k_hat[i] = -2.2250738585072014e-308 * 0.5; break;
        default: b.k_hat[i] = 1e300 * vals.uniform(3 * i + 2); break;
        }
    }
    if (rng.below(2) == 0) {
        Image r(rows, cols);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = 1.0 + vals.uniform(7777 + i);
        b.r = std::move(r);
    }
    b.l = static_cast<std::uint32_t>(rng.below(1000));
    b.zero_meaned = rng.below(2) == 0;
    b.dft_wienered = rng.below(2) == 0;
    b.whitened = rng.below(2) == 0;
    b.denoiser_id = rng.below(2) == 0 ? "mihcak-db8-l4-s5.0" : "";
    if (rng.below(2) == 0) b.creation_seed = rng.next();
    return b;
}

} // namespace

TEST_CASE("pgm decode: 2x2 graymap is the identity") {
    const fs::path p = temp_dir() / "tiny.pgm";
    write_file(p, std::string("P5\n2 2\n255\n") + '\x00' + '\xff' + '\x80' + '\x40');
    const Image img = load_image(p);
    REQUIRE(img.rows() == 2);
    REQUIRE(img.cols() == 2);
    CHECK(img(0, 0) == 0.0);
    CHECK(img(0, 1) == 255.0);
    CHECK(img(1, 0) == 128.0);
    CHECK(img(1, 1) == 64.0);
}

TEST_CASE("ascii pgm with comments decodes identically") {
    const fs::path p = temp_dir() / "ascii.pgm";
    write_file(p, "P2\n# a comment\n2 2\n255\n0 255\n128 64\n");
    const Image img = load_image(p);
    CHECK(img(0, 0) == 0.0);
    CHECK(img(0, 1) == 255.0);
    CHECK(img(1, 0) == 128.0);
    CHECK(img(1, 1) == 64.0);
}

TEST_CASE("pure-red png converts with the 601 weights") {
    const fs::path p = temp_dir() / "red.png";
    write_rgb_png(p, 3, 4, 255, 0, 0);
    const Image img = load_image(p);
    REQUIRE(img.rows() == 3);
    REQUIRE(img.cols() == 4);
    for (std::size_t i = 0; i < img.size(); ++i)
        CHECK(img[i] == doctest::Approx(76.245).epsilon(1e-12));
}

TEST_CASE("decoding the same file twice gives identical matrices") {
    const fs::path p = temp_dir() / "twice.png";
    write_rgb_png(p, 5, 7, 12, 200, 33);
    CHECK(load_image(p) == load_image(p));
}

TEST_CASE("save_pgm then load is the identity on 8-bit data") {
    Image img(9, 13);
    SequentialRng rng(3, kStreamTexture);
    for (std::size_t i = 0; i < img.size(); ++i) img[i] = static_cast<double>(rng.below(256));
    const fs::path p = temp_dir() / "roundtrip.pgm";
    save_pgm(img, p);
    CHECK(load_image(p) == img);
}

TEST_CASE("image decode errors") {
    CHECK_THROWS_AS(load_image(temp_dir() / "missing.pgm"), DataError);
    const fs::path bad = temp_dir() / "bad.pgm";
    write_file(bad, "P5\n0 0\n255\n");
    CHECK_THROWS_AS(load_image(bad), DataError);
    const fs::path deep = temp_dir() / "deep.pgm";
    write_file(deep, "P5\n2 2\n65535\n");
    CHECK_THROWS_AS(load_image(deep), DataError);
    const fs::path trunc = temp_dir() / "trunc.pgm";
    write_file(trunc, std::string("P5\n2 2\n255\n") + '\x01');
    CHECK_THROWS_AS(load_image(trunc), DataError);
    const fs::path junk = temp_dir() / "junk.bin";
    write_file(junk, "not an image at all");
    CHECK_THROWS_AS(load_image(junk), DataError);
}

TEST_CASE("manifest round trip and role filters") {
    DatasetManifest m;
    m.source_note = "synthetic";
    for (int i = 0; i < 50; ++i) {
        ManifestEntry e;
        e.path = "img_" + std::to_string(i) + ".pgm";
        e.role = Role::Estimation;
        m.entries.push_back(e);
    }
    m.entries.push_back({"probe.pgm", Role::Query, "held"});
    const fs::path p = temp_dir() / "manifest.json";
    save_manifest(m, p);
    const DatasetManifest back = load_manifest(p);
    REQUIRE(back.entries.size() == 51);
    CHECK(back.source_note == "synthetic");
    CHECK(back.entries_with_role(Role::Estimation).size() == 50);
    CHECK(back.entries[50].label == "held");
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        CHECK(back.entries[i].path == m.entries[i].path);
        CHECK(back.entries[i].role == m.entries[i].role);
    }
}

TEST_CASE("manifest errors: duplicate path, unknown role, empty") {
    const fs::path p = temp_dir() / "bad_manifest.json";
    write_file(p, R"({"entries":[{"path":"a.pgm","role":"estimation"},
                                 {"path":"a.pgm","role":"query"}]})");
    CHECK_THROWS_AS(load_manifest(p), DataError);
    write_file(p, R"({"entries":[{"path":"a.pgm","role":"train"}]})");
    CHECK_THROWS_AS(load_manifest(p), DataError);
    write_file(p, R"({"entries":[]})");
    CHECK_THROWS_AS(load_manifest(p), DataError);
    write_file(p, "{nonsense");
    CHECK_THROWS_AS(load_manifest(p), DataError);
}

TEST_CASE("bundle round-trip is bit-exact over fuzzed payloads") {
    const fs::path p = temp_dir() / "fuzz.bundle";
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const FingerprintBundle b = random_bundle(seed);
        save_bundle(b, p);
        const FingerprintBundle back = load_bundle(p);
        REQUIRE(back == b);
        // bitwise, not just ==: catch -0.0 vs 0.0
        for (std::size_t i = 0; i < b.k_hat.size(); ++i) {
            const double va = b.k_hat[i], vb = back.k_hat[i];
            std::uint64_t ua, ub;
            std::memcpy(&ua, &va, 8);
            std::memcpy(&ub, &vb, 8);
            REQUIRE(ua == ub);
        }
    }
}

TEST_CASE("bundle without R round-trips with R absent") {
    FingerprintBundle b;
    b.k_hat = Image(3, 3, 0.5);
    b.denoiser_id = "oracle";
    const fs::path p = temp_dir() / "nor.bundle";
    save_bundle(b, p);
    const FingerprintBundle back = load_bundle(p);
    CHECK(!back.r.has_value());
    CHECK(back == b);
}

TEST_CASE("bundle format errors") {
    const fs::path p = temp_dir() / "bad.bundle";
    write_file(p, "NOPE\x01");
    CHECK_THROWS_AS(load_bundle(p), DataError);

    FingerprintBundle b;
    b.k_hat = Image(4, 4, 1.0);
    save_bundle(b, p);
    std::ifstream in(p, std::ios::binary);
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();

    write_file(p, blob.substr(0, blob.size() - 9)); // truncated payload
    CHECK_THROWS_AS(load_bundle(p), DataError);
    write_file(p, blob + "xx"); // trailing garbage
    CHECK_THROWS_AS(load_bundle(p), DataError);
    std::string wrong_version = blob;
    wrong_version[4] = 0x02;
    write_file(p, wrong_version);
    CHECK_THROWS_AS(load_bundle(p), DataError);
}

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "gcreg/image_io.hpp"
#include "gcreg/render.hpp"
#include "test_util.hpp"

#ifdef GCREG_WITH_PNG
#include <png.h>
#endif

using namespace gcreg;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / "gcreg_io_test";
  fs::create_directories(d);
  return d;
}

std::size_t error_offset(const std::string& bytes) {
  try {
    decode_pgm(bytes);
  } catch (const FormatError& e) {
    return e.offset();
  }
  return std::string::npos;
}

}  // namespace

TEST(Pgm, AsciiTwoByTwo) {
  const ScalarField f = decode_pgm("P2 2 2 255 0 128 255 64");
  ASSERT_EQ(f.width(), 2);
  ASSERT_EQ(f.height(), 2);
  EXPECT_EQ(f(0, 0), 0.0);
  EXPECT_EQ(f(1, 0), 128.0);
  EXPECT_EQ(f(0, 1), 255.0);
  EXPECT_EQ(f(1, 1), 64.0);
}

TEST(Pgm, BinaryMatchesAscii) {
  const ScalarField a = decode_pgm("P2\n# comment\n3 2\n255\n1 2 3\n250 251 0\n");
  const std::string p5 = std::string("P5\n3 2\n255\n") + std::string{char(1), char(2), char(3), char(250), char(251), char(0)};
  EXPECT_EQ(decode_pgm(p5), a);
}

TEST(Pgm, RescalesMaxval) {
  const ScalarField f = decode_pgm("P2 2 1 15 15 5");
  EXPECT_DOUBLE_EQ(f(0, 0), 255.0);
  EXPECT_DOUBLE_EQ(f(1, 0), 85.0);
  const std::string p5 = std::string("P5 1 1 65535\n") + std::string{char(0xff), char(0xff)};
  EXPECT_DOUBLE_EQ(decode_pgm(p5)(0, 0), 255.0);
}

TEST(Pgm, ErrorsCarryKindAndOffset) {
  try {
    decode_pgm("P6 1 1 255 0");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedFormat);
  }
  EXPECT_EQ(error_offset("P2 2 2 255 0 1 2"), 16u);      // missing fourth sample
  EXPECT_EQ(error_offset("P2 2 1 255 0 300"), 13u);      // exceeds maxval
  EXPECT_EQ(error_offset("P5 2 2 255\nab"), 13u);        // truncated raster
  EXPECT_EQ(error_offset("P2 x 2 255"), 3u);             // bad width
  try {
    decode_pgm("P2 2 2 70000 0 0 0 0");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CorruptFile);
    EXPECT_EQ(e.offset(), 7u);
  }
}

TEST(Pgm, SaveLoadRoundTripIsExact) {
  ScalarField f(7, 5);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = static_cast<double>((k * 37) % 256);
  const fs::path dir = scratch_dir();
  for (bool binary : {true, false}) {
    const fs::path p = dir / (binary ? "rt5.pgm" : "rt2.pgm");
    save_pgm(p, f, binary);
    const ScalarField g = load_image(p);
    EXPECT_EQ(g, f);
    save_pgm(p, g, binary);
    EXPECT_EQ(load_image(p), f);
  }
}

TEST(Pgm, SaveRoundsAndClamps) {
  ScalarField f(3, 1);
  f[0] = -5.0;
  f[1] = 12.5;
  f[2] = 300.0;
  const ScalarField g = decode_pgm(encode_pgm(f));
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g[1], 13.0);
  EXPECT_EQ(g[2], 255.0);
}

TEST(Pgm, MissingFileIsIoFailure) {
  try {
    load_image(scratch_dir() / "does_not_exist.pgm");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IoFailure);
  }
}

#ifdef GCREG_WITH_PNG
TEST(Png, SixteenBitIsRescaled) {
  const fs::path p = scratch_dir() / "g16.png";
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = 2;
  img.height = 1;
  img.format = PNG_FORMAT_LINEAR_Y;
  const png_uint_16 px[2] = {65535, 13107};
  ASSERT_NE(png_image_write_to_file(&img, p.string().c_str(), 0, px, 0, nullptr), 0);
  const ScalarField f = load_image(p);
  EXPECT_DOUBLE_EQ(f(0, 0), 255.0);
  EXPECT_NEAR(f(1, 0), 13107 * 255.0 / 65535.0, 1e-9);
}

TEST(Png, EightBitGray) {
  const fs::path p = scratch_dir() / "g8.png";
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = 3;
  img.height = 1;
  img.format = PNG_FORMAT_GRAY;
  const png_byte px[3] = {0, 77, 255};
  ASSERT_NE(png_image_write_to_file(&img, p.string().c_str(), 0, px, 0, nullptr), 0);
  const ScalarField f = load_image(p);
  EXPECT_EQ(f(1, 0), 77.0);
}
#endif

TEST(Render, ZeroDisplacementGivesRegularGrid) {
  const ScalarField g = render_deformed_grid(VectorField2::zeros(17, 17), 4);
  for (int j = 0; j < 17; ++j)
    for (int i = 0; i < 17; ++i) {
      const bool on_line = i % 4 == 0 || j % 4 == 0;
      EXPECT_EQ(g(i, j), on_line ? 0.0 : 255.0) << i << "," << j;
    }
  EXPECT_THROW(render_deformed_grid(VectorField2::zeros(8, 8), 1), Error);
}

TEST(Render, ConstantShiftMovesLines) {
  VectorField2 u = VectorField2::zeros(17, 17);
  u.x = ScalarField(17, 17, 1.0, 3.0);
  const ScalarField g = render_deformed_grid(u, 4);
  // Vertical lines now sit at columns 3, 7, 11, 15.
  for (int j = 1; j < 17; ++j) {
    if (j % 4 == 0) continue;
    for (int i = 0; i < 17; ++i) EXPECT_EQ(g(i, j), (i % 4 == 3) ? 0.0 : 255.0) << i << "," << j;
  }
  // Horizontal lines start at column 3.
  EXPECT_EQ(g(2, 4), 255.0);
  EXPECT_EQ(g(3, 4), 0.0);
}

TEST(Render, DifferenceImageMidGray) {
  const ScalarField a = test::random_field(5, 5, 1, 100.0);
  EXPECT_EQ(difference_image(a, a), ScalarField(5, 5, 1.0, 128.0));
}

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "flamedet/losses.hpp"
#include "flamedet/tensor.hpp"

namespace flamedet {

/// One labeled box: class id plus normalized center/size (all in [0, 1]).
struct Annotation {
    int class_id = 0;
    double cx = 0, cy = 0, w = 0, h = 0;
};

/// 8-bit RGB raster, row-major, interleaved.
struct Image {
    int width = 0, height = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t* px(int x, int y) {
        return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }
    const std::uint8_t* px(int x, int y) const {
        return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }
};

enum class Split { Train, Val, Test };
const char* to_string(Split s);

struct SplitManifest {
    std::uint64_t seed = 0;
    std::map<std::string, Split> assignments;
    int train_count = 0, val_count = 0, test_count = 0;
};

enum class AugKind { Hflip, Crop, Occlude, Noise, Brightness };
AugKind aug_kind_from_string(const std::string& s);

/// Augmentation description. Parameter ranges are knobs with the defaults
/// listed; identical (op, seed, image) always produces identical output.
struct AugmentOp {
    AugKind kind = AugKind::Hflip;
    std::uint64_t seed = 0;
    double crop_scale_lo = 0.6, crop_scale_hi = 1.0;
    double crop_keep_area = 0.25;     // boxes retaining less are dropped
    int occlude_min_rects = 1, occlude_max_rects = 3;
    double occlude_area_lo = 0.05, occlude_area_hi = 0.15;
    double noise_sigma_lo = 5.0, noise_sigma_hi = 20.0;
    double brightness_lo = 0.6, brightness_hi = 1.4;
};

// --- label codec ------------------------------------------------------

/// Parses "class cx cy w h" lines; throws FormatError with the line number
/// on malformed input. An empty file is a valid negative sample.
std::vector<Annotation> parse_labels(const std::string& text);

/// One annotation per line, 6-decimal fixed point; box edges are clamped
/// into [0, 1] before writing.
std::string write_labels(const std::vector<Annotation>& annotations);

Box cxcywh_to_xyxy(const Annotation& a, int img_w, int img_h);
Annotation xyxy_to_cxcywh(const Box& b, int img_w, int img_h, int class_id);

// --- dataset layout ---------------------------------------------------

struct ClassStats {
    int boxes = 0;
    double mean_w = 0, mean_h = 0;  // normalized units
};

struct SplitStats {
    int images = 0, labels = 0, boxes = 0;
    std::map<int, ClassStats> per_class;
};

struct DatasetReport {
    std::map<std::string, SplitStats> per_split;
    std::vector<std::string> violations;  // each names the offending path

    bool ok() const { return violations.empty(); }
};

/// Checks <root>/images/{train,val,test}/*.ppm against
/// <root>/labels/{train,val,test}/*.txt: pairing both ways plus label
/// syntax; reports counts and per-class box statistics.
DatasetReport validate_dataset(const std::filesystem::path& root);

/// Deterministic split: filenames are sorted, shuffled by a seeded
/// generator, then assigned val/test counts of floor(N*r/denominator)
/// with the remainder going to train.
SplitManifest split_dataset(std::vector<std::string> files, std::array<int, 3> ratio,
                            std::uint64_t seed);

std::pair<Image, std::vector<Annotation>> augment(const Image& image,
                                                  const std::vector<Annotation>& annotations,
                                                  const AugmentOp& op);

// --- raster I/O -------------------------------------------------------

/// Binary PPM (P6), maxval 255. Header comments tolerated on read.
Image read_ppm(const std::filesystem::path& path);
void write_ppm(const Image& image, const std::filesystem::path& path);

// --- preprocessing ----------------------------------------------------

struct Letterboxed {
    Tensor input;   // (1, 3, target, target), values in [0, 1]
    double scale = 1.0;
    int pad_x = 0, pad_y = 0;
};

/// Aspect-preserving resize (nearest-neighbor by default) onto a square
/// gray-114 canvas. The returned parameters invert detections back to the
/// original frame.
Letterboxed letterbox(const Image& image, int target = 640, bool bilinear = false);

/// Maps a box from network-input coordinates back to original image
/// coordinates, clipped to the image bounds.
Box unletterbox(const Box& b, const Letterboxed& lb, int orig_w, int orig_h);

// --- config -----------------------------------------------------------

/// Plain-text key:value dataset description (root, train, val, test, nc,
/// names as comma-separated values).
struct DataConfig {
    std::string root, train = "train", val = "val", test = "test";
    int nc = 1;
    std::vector<std::string> names;
};

DataConfig parse_data_config(const std::filesystem::path& path);

}  // namespace flamedet

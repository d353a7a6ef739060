#include "flamedet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "flamedet/rng.hpp"

namespace fs = std::filesystem;

namespace flamedet {

const char* to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

AugKind aug_kind_from_string(const std::string& s) {
    if (s == "hflip") return AugKind::Hflip;
    if (s == "crop") return AugKind::Crop;
    if (s == "occlude") return AugKind::Occlude;
    if (s == "noise") return AugKind::Noise;
    if (s == "brightness") return AugKind::Brightness;
    throw ConfigError("unknown augmentation: " + s);
}

// --- label codec ------------------------------------------------------

std::vector<Annotation> parse_labels(const std::string& text) {
    std::vector<Annotation> out;
    std::istringstream stream(text);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        std::istringstream fields(line);
        std::vector<std::string> tokens;
        std::string tok;
        while (fields >> tok) tokens.push_back(tok);
        if (tokens.empty()) continue;  // blank line
        if (tokens.size() != 5)
            throw FormatError("label line " + std::to_string(line_no) + ": expected 5 fields, got " +
                              std::to_string(tokens.size()));

        Annotation a;
        char* end = nullptr;
        const long cls = std::strtol(tokens[0].c_str(), &end, 10);
        if (*end != '\0' || cls < 0)
            throw FormatError("label line " + std::to_string(line_no) +
                              ": class must be a non-negative integer, got '" + tokens[0] + "'");
        a.class_id = static_cast<int>(cls);

        double vals[4];
        for (int i = 0; i < 4; ++i) {
            end = nullptr;
            vals[i] = std::strtod(tokens[i + 1].c_str(), &end);
            if (*end != '\0')
                throw FormatError("label line " + std::to_string(line_no) + ": bad number '" +
                                  tokens[i + 1] + "'");
        }
        a.cx = vals[0];
        a.cy = vals[1];
        a.w = vals[2];
        a.h = vals[3];
        const char* names[4] = {"cx", "cy", "w", "h"};
        for (int i = 0; i < 4; ++i)
            if (vals[i] < 0.0 || vals[i] > 1.0)
                throw FormatError("label line " + std::to_string(line_no) + ": " + names[i] +
                                  " out of range [0,1]: " + tokens[i + 1]);
        if (a.w <= 0.0 || a.h <= 0.0)
            throw FormatError("label line " + std::to_string(line_no) + ": box size must be > 0");
        out.push_back(a);
    }
    return out;
}

std::string write_labels(const std::vector<Annotation>& annotations) {
    std::string out;
    char buf[128];
    for (const Annotation& a : annotations) {
        // Clamp edges into the unit square, then restate as center/size.
        const double x1 = std::clamp(a.cx - a.w / 2, 0.0, 1.0);
        const double x2 = std::clamp(a.cx + a.w / 2, 0.0, 1.0);
        const double y1 = std::clamp(a.cy - a.h / 2, 0.0, 1.0);
        const double y2 = std::clamp(a.cy + a.h / 2, 0.0, 1.0);
        std::snprintf(buf, sizeof buf, "%d %.6f %.6f %.6f %.6f\n", a.class_id, (x1 + x2) / 2,
                      (y1 + y2) / 2, x2 - x1, y2 - y1);
        out += buf;
    }
    return out;
}

Box cxcywh_to_xyxy(const Annotation& a, int img_w, int img_h) {
    return Box{(a.cx - a.w / 2) * img_w, (a.cy - a.h / 2) * img_h, (a.cx + a.w / 2) * img_w,
               (a.cy + a.h / 2) * img_h};
}

Annotation xyxy_to_cxcywh(const Box& b, int img_w, int img_h, int class_id) {
    Annotation a;
    a.class_id = class_id;
    a.cx = (b.x1 + b.x2) / 2 / img_w;
    a.cy = (b.y1 + b.y2) / 2 / img_h;
    a.w = (b.x2 - b.x1) / img_w;
    a.h = (b.y2 - b.y1) / img_h;
    return a;
}

// --- dataset layout ---------------------------------------------------

namespace {

std::string load_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open: " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

DatasetReport validate_dataset(const fs::path& root) {
    DatasetReport report;
    const char* split_names[3] = {"train", "val", "test"};

    for (const char* split : split_names) {
        const fs::path img_dir = root / "images" / split;
        const fs::path lbl_dir = root / "labels" / split;
        SplitStats stats;

        if (!fs::is_directory(img_dir)) {
            report.violations.push_back("missing directory: " + img_dir.string());
        }
        if (!fs::is_directory(lbl_dir)) {
            report.violations.push_back("missing directory: " + lbl_dir.string());
        }

        std::vector<std::string> images, labels;
        if (fs::is_directory(img_dir))
            for (const auto& e : fs::directory_iterator(img_dir))
                if (e.path().extension() == ".ppm") images.push_back(e.path().stem().string());
        if (fs::is_directory(lbl_dir))
            for (const auto& e : fs::directory_iterator(lbl_dir))
                if (e.path().extension() == ".txt") labels.push_back(e.path().stem().string());
        std::sort(images.begin(), images.end());
        std::sort(labels.begin(), labels.end());
        stats.images = static_cast<int>(images.size());
        stats.labels = static_cast<int>(labels.size());

        for (const std::string& stem : images)
            if (!std::binary_search(labels.begin(), labels.end(), stem))
                report.violations.push_back("image without label: " +
                                            (img_dir / (stem + ".ppm")).string());
        for (const std::string& stem : labels)
            if (!std::binary_search(images.begin(), images.end(), stem))
                report.violations.push_back("label without image: " +
                                            (lbl_dir / (stem + ".txt")).string());

        std::map<int, std::array<double, 3>> accum;  // class -> {count, sum_w, sum_h}
        for (const std::string& stem : labels) {
            const fs::path path = lbl_dir / (stem + ".txt");
            try {
                const std::vector<Annotation> anns = parse_labels(load_text(path));
                stats.boxes += static_cast<int>(anns.size());
                for (const Annotation& a : anns) {
                    auto& acc = accum[a.class_id];
                    acc[0] += 1;
                    acc[1] += a.w;
                    acc[2] += a.h;
                }
            } catch (const FormatError& e) {
                report.violations.push_back(path.string() + ": " + e.what());
            }
        }
        for (const auto& [cls, acc] : accum) {
            ClassStats cs;
            cs.boxes = static_cast<int>(acc[0]);
            cs.mean_w = acc[1] / acc[0];
            cs.mean_h = acc[2] / acc[0];
            stats.per_class[cls] = cs;
        }
        report.per_split[split] = stats;
    }
    return report;
}

SplitManifest split_dataset(std::vector<std::string> files, std::array<int, 3> ratio,
                            std::uint64_t seed) {
    if (ratio[0] <= 0 || ratio[1] <= 0 || ratio[2] <= 0)
        throw ConfigError("split_dataset: ratio parts must be positive");

    SplitManifest manifest;
    manifest.seed = seed;
    if (files.empty()) return manifest;

    std::sort(files.begin(), files.end());
    files.erase(std::unique(files.begin(), files.end()), files.end());

    // Fisher-Yates with the documented SplitMix64 stream.
    Rng rng(seed);
    for (std::size_t i = files.size() - 1; i > 0; --i) {
        const std::size_t j = rng.bounded(static_cast<std::uint32_t>(i + 1));
        std::swap(files[i], files[j]);
    }

    const std::uint64_t n = files.size();
    const std::uint64_t denom = static_cast<std::uint64_t>(ratio[0]) + ratio[1] + ratio[2];
    const std::uint64_t n_val = n * ratio[1] / denom;
    const std::uint64_t n_test = n * ratio[2] / denom;

    for (std::uint64_t i = 0; i < n; ++i) {
        Split s = Split::Train;
        if (i < n_val)
            s = Split::Val;
        else if (i < n_val + n_test)
            s = Split::Test;
        manifest.assignments[files[i]] = s;
    }
    manifest.val_count = static_cast<int>(n_val);
    manifest.test_count = static_cast<int>(n_test);
    manifest.train_count = static_cast<int>(n - n_val - n_test);
    return manifest;
}

// --- augmentation -----------------------------------------------------

namespace {

std::pair<Image, std::vector<Annotation>> hflip(const Image& img,
                                                const std::vector<Annotation>& anns) {
    Image out = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            std::memcpy(out.px(img.width - 1 - x, y), img.px(x, y), 3);
    std::vector<Annotation> flipped = anns;
    // Mirror on the 6-decimal grid of the label codec; on that grid the
    // flip is exactly involutive, which plain 1.0 - cx is not in doubles.
    for (Annotation& a : flipped)
        a.cx = static_cast<double>(1000000 - std::lround(a.cx * 1e6)) / 1e6;
    return {std::move(out), std::move(flipped)};
}

std::pair<Image, std::vector<Annotation>> crop(const Image& img,
                                               const std::vector<Annotation>& anns,
                                               const AugmentOp& op) {
    Rng rng(op.seed);
    const int cw = std::max(1, static_cast<int>(std::lround(
                                   img.width * rng.uniform(op.crop_scale_lo, op.crop_scale_hi))));
    const int ch = std::max(1, static_cast<int>(std::lround(
                                   img.height * rng.uniform(op.crop_scale_lo, op.crop_scale_hi))));
    const int x0 = static_cast<int>(rng.bounded(static_cast<std::uint32_t>(img.width - cw + 1)));
    const int y0 = static_cast<int>(rng.bounded(static_cast<std::uint32_t>(img.height - ch + 1)));

    Image out;
    out.width = cw;
    out.height = ch;
    out.pixels.resize(static_cast<std::size_t>(cw) * ch * 3);
    for (int y = 0; y < ch; ++y)
        std::memcpy(out.px(0, y), img.px(x0, y0 + y), static_cast<std::size_t>(cw) * 3);

    std::vector<Annotation> kept;
    for (const Annotation& a : anns) {
        const Box abs = cxcywh_to_xyxy(a, img.width, img.height);
        const Box clipped{std::max(abs.x1, static_cast<double>(x0)),
                          std::max(abs.y1, static_cast<double>(y0)),
                          std::min(abs.x2, static_cast<double>(x0 + cw)),
                          std::min(abs.y2, static_cast<double>(y0 + ch))};
        if (clipped.x2 <= clipped.x1 || clipped.y2 <= clipped.y1) continue;
        if (clipped.area() < op.crop_keep_area * abs.area()) continue;
        const Box local{clipped.x1 - x0, clipped.y1 - y0, clipped.x2 - x0, clipped.y2 - y0};
        kept.push_back(xyxy_to_cxcywh(local, cw, ch, a.class_id));
    }
    return {std::move(out), std::move(kept)};
}

std::pair<Image, std::vector<Annotation>> occlude(const Image& img,
                                                  const std::vector<Annotation>& anns,
                                                  const AugmentOp& op) {
    Rng rng(op.seed);
    Image out = img;
    const int rects = op.occlude_min_rects +
                      static_cast<int>(rng.bounded(static_cast<std::uint32_t>(
                          op.occlude_max_rects - op.occlude_min_rects + 1)));
    for (int r = 0; r < rects; ++r) {
        const double frac = rng.uniform(op.occlude_area_lo, op.occlude_area_hi);
        const double aspect = rng.uniform(0.5, 2.0);
        const double area = frac * img.width * img.height;
        int rw = std::max(1, static_cast<int>(std::lround(std::sqrt(area * aspect))));
        int rh = std::max(1, static_cast<int>(std::lround(std::sqrt(area / aspect))));
        rw = std::min(rw, img.width);
        rh = std::min(rh, img.height);
        const int x0 = static_cast<int>(rng.bounded(static_cast<std::uint32_t>(img.width - rw + 1)));
        const int y0 = static_cast<int>(rng.bounded(static_cast<std::uint32_t>(img.height - rh + 1)));
        const bool constant_fill = rng.bounded(2) == 0;
        for (int y = y0; y < y0 + rh; ++y)
            for (int x = x0; x < x0 + rw; ++x) {
                std::uint8_t* p = out.px(x, y);
                if (constant_fill) {
                    p[0] = p[1] = p[2] = 114;
                } else {
                    p[0] = static_cast<std::uint8_t>(rng.bounded(256));
                    p[1] = static_cast<std::uint8_t>(rng.bounded(256));
                    p[2] = static_cast<std::uint8_t>(rng.bounded(256));
                }
            }
    }
    return {std::move(out), anns};
}

std::uint8_t clamp_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

std::pair<Image, std::vector<Annotation>> add_noise(const Image& img,
                                                    const std::vector<Annotation>& anns,
                                                    const AugmentOp& op) {
    Rng rng(op.seed);
    const double sigma = rng.uniform(op.noise_sigma_lo, op.noise_sigma_hi);
    Image out = img;
    for (std::uint8_t& v : out.pixels) v = clamp_u8(v + rng.normal() * sigma);
    return {std::move(out), anns};
}

std::pair<Image, std::vector<Annotation>> brightness(const Image& img,
                                                     const std::vector<Annotation>& anns,
                                                     const AugmentOp& op) {
    Rng rng(op.seed);
    const double factor = rng.uniform(op.brightness_lo, op.brightness_hi);
    Image out = img;
    for (std::uint8_t& v : out.pixels) v = clamp_u8(v * factor);
    return {std::move(out), anns};
}

}  // namespace

std::pair<Image, std::vector<Annotation>> augment(const Image& image,
                                                  const std::vector<Annotation>& annotations,
                                                  const AugmentOp& op) {
    if (image.width <= 0 || image.height <= 0 ||
        image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * 3)
        throw ShapeError("augment: malformed image buffer");
    switch (op.kind) {
        case AugKind::Hflip: return hflip(image, annotations);
        case AugKind::Crop: return crop(image, annotations, op);
        case AugKind::Occlude: return occlude(image, annotations, op);
        case AugKind::Noise: return add_noise(image, annotations, op);
        case AugKind::Brightness: return brightness(image, annotations, op);
    }
    throw ConfigError("augment: unknown kind");
}

// --- raster I/O -------------------------------------------------------

namespace {

// Reads one whitespace-delimited token, skipping '#' comments.
std::string ppm_token(std::istream& in) {
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    return tok;
}

}  // namespace

Image read_ppm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open: " + path.string());

    const std::string magic = ppm_token(in);
    if (magic != "P6") throw FormatError("not a binary PPM (P6): " + path.string());
    const std::string ws = ppm_token(in), hs = ppm_token(in), maxs = ppm_token(in);
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(ws);
        h = std::stoi(hs);
        maxval = std::stoi(maxs);
    } catch (...) {
        throw FormatError("bad PPM header in " + path.string());
    }
    if (w <= 0 || h <= 0) throw FormatError("bad PPM dimensions in " + path.string());
    if (maxval != 255) throw FormatError("PPM maxval must be 255 in " + path.string());

    Image img;
    img.width = w;
    img.height = h;
    img.pixels.resize(static_cast<std::size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw FormatError("short PPM payload in " + path.string());
    return img;
}

void write_ppm(const Image& image, const fs::path& path) {
    if (image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * 3)
        throw ShapeError("write_ppm: malformed image buffer");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open for writing: " + path.string());
    out << "P6\n" << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out) throw FormatError("write failed: " + path.string());
}

// --- preprocessing ----------------------------------------------------

Letterboxed letterbox(const Image& image, int target, bool bilinear) {
    if (image.width <= 0 || image.height <= 0) throw ShapeError("letterbox: empty image");

    Letterboxed out;
    out.scale = static_cast<double>(target) / std::max(image.width, image.height);
    const int new_w = std::max(1, static_cast<int>(std::lround(image.width * out.scale)));
    const int new_h = std::max(1, static_cast<int>(std::lround(image.height * out.scale)));
    out.pad_x = (target - new_w) / 2;
    out.pad_y = (target - new_h) / 2;

    constexpr float kGray = 114.0f / 255.0f;
    out.input = Tensor::full(Shape{1, 3, target, target}, kGray);
    float* data = out.input.data();
    const std::size_t plane = static_cast<std::size_t>(target) * target;

    for (int y = 0; y < new_h; ++y) {
        for (int x = 0; x < new_w; ++x) {
            float rgb[3];
            if (bilinear) {
                const double sx = (x + 0.5) / out.scale - 0.5;
                const double sy = (y + 0.5) / out.scale - 0.5;
                const int x0 = std::clamp(static_cast<int>(std::floor(sx)), 0, image.width - 1);
                const int y0 = std::clamp(static_cast<int>(std::floor(sy)), 0, image.height - 1);
                const int x1 = std::min(x0 + 1, image.width - 1);
                const int y1 = std::min(y0 + 1, image.height - 1);
                const double fx = std::clamp(sx - x0, 0.0, 1.0);
                const double fy = std::clamp(sy - y0, 0.0, 1.0);
                for (int c = 0; c < 3; ++c) {
                    const double top = image.px(x0, y0)[c] * (1 - fx) + image.px(x1, y0)[c] * fx;
                    const double bot = image.px(x0, y1)[c] * (1 - fx) + image.px(x1, y1)[c] * fx;
                    rgb[c] = static_cast<float>(top * (1 - fy) + bot * fy);
                }
            } else {
                const int sx = std::min(image.width - 1,
                                        static_cast<int>((x + 0.5) / out.scale));
                const int sy = std::min(image.height - 1,
                                        static_cast<int>((y + 0.5) / out.scale));
                for (int c = 0; c < 3; ++c) rgb[c] = image.px(sx, sy)[c];
            }
            const std::size_t idx =
                static_cast<std::size_t>(out.pad_y + y) * target + (out.pad_x + x);
            for (int c = 0; c < 3; ++c) data[c * plane + idx] = rgb[c] / 255.0f;
        }
    }
    return out;
}

Box unletterbox(const Box& b, const Letterboxed& lb, int orig_w, int orig_h) {
    Box out{(b.x1 - lb.pad_x) / lb.scale, (b.y1 - lb.pad_y) / lb.scale,
            (b.x2 - lb.pad_x) / lb.scale, (b.y2 - lb.pad_y) / lb.scale};
    out.x1 = std::clamp(out.x1, 0.0, static_cast<double>(orig_w));
    out.x2 = std::clamp(out.x2, 0.0, static_cast<double>(orig_w));
    out.y1 = std::clamp(out.y1, 0.0, static_cast<double>(orig_h));
    out.y2 = std::clamp(out.y2, 0.0, static_cast<double>(orig_h));
    return out;
}

// --- config -----------------------------------------------------------

DataConfig parse_data_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open: " + path.string());
    DataConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::size_t colon = line.find(':');
        if (colon == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw FormatError(path.string() + ":" + std::to_string(line_no) +
                                  ": expected key: value");
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, colon));
        const std::string value = trim(line.substr(colon + 1));
        if (key == "root")
            cfg.root = value;
        else if (key == "train")
            cfg.train = value;
        else if (key == "val")
            cfg.val = value;
        else if (key == "test")
            cfg.test = value;
        else if (key == "nc")
            cfg.nc = std::stoi(value);
        else if (key == "names") {
            cfg.names.clear();
            std::istringstream ss(value);
            std::string name;
            while (std::getline(ss, name, ',')) cfg.names.push_back(trim(name));
        } else {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": unknown key '" +
                              key + "'");
        }
    }
    return cfg;
}

}  // namespace flamedet

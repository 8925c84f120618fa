#include "rek/eyegen.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

namespace rek {

std::array<double, 3> angles_to_gaze(double pitch, double yaw) {
  if (!std::isfinite(pitch) || !std::isfinite(yaw)) {
    throw OutOfRange("angles_to_gaze: non-finite angle");
  }
  return {-std::cos(pitch) * std::sin(yaw), -std::sin(pitch), -std::cos(pitch) * std::cos(yaw)};
}

namespace {

struct Vec3 {
  double x, y, z;
};

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

Vec3 normalize(const Vec3& a) {
  const double n = std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z);
  return {a.x / n, a.y / n, a.z / n};
}

// Quadratic arc between the corners: y(x) = apex * (1 - (x/w)^2).
double arc_y(double apex, double x, double w) { return apex * (1.0 - (x / w) * (x / w)); }

}  // namespace

LandmarkSample synthesize_sample(double pitch, double yaw, const EyeModelParams& params,
                                 uint64_t sample_index) {
  params.validate();
  if (std::fabs(pitch) > kMaxAngleRad + 1e-12 || std::fabs(yaw) > kMaxAngleRad + 1e-12) {
    throw OutOfRange("synthesize_sample: angle outside +/-30 degree range");
  }

  const double R = params.eyeball_radius;
  const double w = params.corner_half_width;
  const auto g3 = angles_to_gaze(pitch, yaw);
  const Vec3 g{g3[0], g3[1], g3[2]};

  // Iris disk on the eyeball surface, perpendicular to the gaze direction.
  const double theta = std::asin(params.iris_radius / R);
  const Vec3 up{0.0, 1.0, 0.0};
  const Vec3 u = normalize(cross(up, g));
  const Vec3 v = cross(g, u);

  // 19 pre-normalization 2D points: 8 iris edge, 8 eyelid, iris center,
  // eyeball-center estimate. The last two give the derived center vector.
  std::array<std::array<double, 2>, 19> pts{};

  const double ct = std::cos(theta), st = std::sin(theta);
  for (size_t k = 0; k < 8; ++k) {
    const double phi = 2.0 * M_PI * static_cast<double>(k) / 8.0;
    const double cu = std::cos(phi), sv = std::sin(phi);
    pts[k][0] = R * (ct * g.x + st * (u.x * cu + v.x * sv));
    pts[k][1] = R * (ct * g.y + st * (u.y * cu + v.y * sv));
  }

  // Eyelid octet: the two corners, three points on the upper arc, three on
  // the lower arc. Only the upper apex tracks pitch.
  const double apex_up = params.eyelid_openness_base * R * (1.0 - 0.3 * std::sin(pitch));
  const double apex_lo = -0.6 * params.eyelid_openness_base * R;
  pts[8] = {-w, 0.0};
  pts[9] = {w, 0.0};
  const double xs[3] = {-0.5 * w, 0.0, 0.5 * w};
  for (size_t k = 0; k < 3; ++k) pts[10 + k] = {xs[k], arc_y(apex_up, xs[k], w)};
  for (size_t k = 0; k < 3; ++k) pts[13 + k] = {xs[k], arc_y(apex_lo, xs[k], w)};

  pts[16] = {R * g.x, R * g.y};  // iris center
  pts[17] = {0.0, 0.0};          // eyeball center estimate

  if (params.landmark_noise_std > 0.0) {
    Mt19937Source src(derive_seed(derive_seed(params.seed, sample_index), 1));
    for (size_t k = 0; k < 18; ++k) {
      pts[k][0] += params.landmark_noise_std * gaussian(src);
      pts[k][1] += params.landmark_noise_std * gaussian(src);
    }
  }

  pts[18] = {pts[17][0] - pts[16][0], pts[17][1] - pts[16][1]};

  const double dx = pts[9][0] - pts[8][0];
  const double dy = pts[9][1] - pts[8][1];
  const double corner_dist = std::sqrt(dx * dx + dy * dy);

  LandmarkSample s;
  s.pitch = pitch;
  s.yaw = yaw;
  size_t f = 0;
  for (size_t k = 0; k < 8; ++k) {  // iris edge
    s.features[f++] = pts[k][0] / corner_dist;
    s.features[f++] = pts[k][1] / corner_dist;
  }
  for (size_t k = 8; k < 16; ++k) {  // eyelid
    s.features[f++] = pts[k][0] / corner_dist;
    s.features[f++] = pts[k][1] / corner_dist;
  }
  s.features[f++] = pts[16][0] / corner_dist;
  s.features[f++] = pts[16][1] / corner_dist;
  s.features[f++] = pts[18][0] / corner_dist;
  s.features[f++] = pts[18][1] / corner_dist;
  return s;
}

RealDataset generate_dataset(size_t n, const EyeModelParams& params) {
  if (n < 1) throw DimensionMismatch("generate_dataset: n must be >= 1");
  RealDataset data;
  data.n_f = kNumFeatures;
  data.n = n;
  data.features.resize(kNumFeatures * n);
  data.labels.targets.resize(n);
  for (size_t i = 0; i < n; ++i) {
    uint64_t s = derive_seed(params.seed, i);
    Mt19937Source src(s);
    const double pitch = uniform_in(src, -kMaxAngleRad, kMaxAngleRad);
    const double yaw = uniform_in(src, -kMaxAngleRad, kMaxAngleRad);
    const LandmarkSample sample = synthesize_sample(pitch, yaw, params, i);
    std::memcpy(data.features.data() + i * kNumFeatures, sample.features.data(),
                kNumFeatures * sizeof(double));
    data.labels.targets[i] = {pitch, yaw};
  }
  return data;
}

namespace {

constexpr char kRekdMagic[4] = {'R', 'E', 'K', 'D'};
constexpr uint16_t kRekdVersion = 1;

template <typename T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

void write_rekd(const std::string& path, const RealDataset& data) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write(kRekdMagic, 4);
  put<uint16_t>(os, kRekdVersion);
  put<uint64_t>(os, data.n);
  put<uint64_t>(os, data.n_f);
  for (size_t i = 0; i < data.n; ++i) {
    os.write(reinterpret_cast<const char*>(data.features.data() + i * data.n_f),
             static_cast<std::streamsize>(data.n_f * sizeof(double)));
    put<double>(os, data.labels.targets[i][0]);
    put<double>(os, data.labels.targets[i][1]);
  }
  if (!os) throw IoError("write failed: " + path);
}

RealDataset read_rekd(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kRekdMagic, 4) != 0) {
    throw BadMagic("not a REKD file: " + path);
  }
  const auto version = get<uint16_t>(is);
  if (version != kRekdVersion) {
    throw UnknownType("unsupported REKD version " + std::to_string(version));
  }
  RealDataset data;
  data.n = get<uint64_t>(is);
  data.n_f = get<uint64_t>(is);
  if (!is || data.n == 0 || data.n_f == 0 || data.n_f > 1u << 20 || data.n > 1ull << 32) {
    throw Truncated("corrupt REKD header: " + path);
  }
  data.features.resize(data.n * data.n_f);
  data.labels.targets.resize(data.n);
  for (size_t i = 0; i < data.n; ++i) {
    is.read(reinterpret_cast<char*>(data.features.data() + i * data.n_f),
            static_cast<std::streamsize>(data.n_f * sizeof(double)));
    data.labels.targets[i][0] = get<double>(is);
    data.labels.targets[i][1] = get<double>(is);
  }
  if (!is) throw Truncated("REKD file shorter than header claims: " + path);
  return data;
}

void write_csv(const std::string& path, const RealDataset& data) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path);
  for (size_t d = 0; d < data.n_f; ++d) os << "f" << d << ",";
  os << "pitch,yaw\n";
  os.precision(17);
  for (size_t i = 0; i < data.n; ++i) {
    for (size_t d = 0; d < data.n_f; ++d) os << data.at(d, i) << ",";
    os << data.labels.targets[i][0] << "," << data.labels.targets[i][1] << "\n";
  }
  if (!os) throw IoError("write failed: " + path);
}

uint64_t file_checksum(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  uint64_t h = 0xcbf29ce484222325ull;
  char buf[65536];
  while (is) {
    is.read(buf, sizeof(buf));
    h = fnv1a64(buf, static_cast<size_t>(is.gcount()), h);
  }
  return h;
}

}  // namespace rek

#include "brs/metrics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace brs {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

std::vector<double> luma(const Frame& f) {
    std::vector<double> out(static_cast<std::size_t>(f.pixel_count()));
    if (f.channels == 3) {
        const std::size_t plane = out.size();
        for (std::size_t i = 0; i < plane; ++i) {
            out[i] = 0.299 * f.values[i] + 0.587 * f.values[plane + i] +
                     0.114 * f.values[2 * plane + i];
        }
    } else if (f.channels == 1) {
        out.assign(f.values.begin(), f.values.end());
    } else {
        // average the planes
        const std::size_t plane = out.size();
        for (std::size_t i = 0; i < plane; ++i) {
            double s = 0.0;
            for (int c = 0; c < f.channels; ++c) s += f.values[c * plane + i];
            out[i] = s / f.channels;
        }
    }
    return out;
}

const std::vector<double>& gaussian_kernel() {
    static const std::vector<double> kernel = [] {
        std::vector<double> k(kWindow);
        const double c = (kWindow - 1) / 2.0;
        double sum = 0.0;
        for (int i = 0; i < kWindow; ++i) {
            k[static_cast<std::size_t>(i)] = std::exp(-((i - c) * (i - c)) / (2.0 * kSigma * kSigma));
            sum += k[static_cast<std::size_t>(i)];
        }
        for (auto& v : k) v /= sum;
        return k;
    }();
    return kernel;
}

}  // namespace

double psnr(const Frame& x, const Frame& y, double peak) {
    if (!same_dims(x, y)) throw ShapeError("psnr: dims differ");
    if (peak <= 0.0) throw ShapeError("psnr: peak must be positive");
    long double acc = 0.0L;
    for (std::size_t i = 0; i < x.values.size(); ++i) {
        const long double d = static_cast<long double>(x.values[i]) - y.values[i];
        acc += d * d;
    }
    const double mse = static_cast<double>(acc / static_cast<long double>(x.values.size()));
    if (mse == 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

double ssim(const Frame& x, const Frame& y) {
    if (!same_dims(x, y)) throw ShapeError("ssim: dims differ");
    if (x.height < kWindow || x.width < kWindow) {
        throw ShapeError("ssim: frame smaller than the 11x11 window");
    }
    const std::vector<double> lx = luma(x);
    const std::vector<double> ly = luma(y);
    const std::vector<double>& k = gaussian_kernel();
    const int h = x.height, w = x.width;

    const double c1 = kK1 * kK1;  // dynamic range 1.0
    const double c2 = kK2 * kK2;

    // Separable Gaussian moments: mu, x^2, y^2, x*y.
    const int oh = h - kWindow + 1, ow = w - kWindow + 1;
    auto idx = [w](int yy, int xx) { return static_cast<std::size_t>(yy) * w + xx; };

    // horizontal pass
    std::vector<double> hx(static_cast<std::size_t>(h) * ow), hy(hx.size()), hxx(hx.size()),
        hyy(hx.size()), hxy(hx.size());
    for (int yy = 0; yy < h; ++yy) {
        for (int xx = 0; xx < ow; ++xx) {
            double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
            for (int t = 0; t < kWindow; ++t) {
                const double a = lx[idx(yy, xx + t)];
                const double b = ly[idx(yy, xx + t)];
                const double kt = k[static_cast<std::size_t>(t)];
                sx += kt * a;
                sy += kt * b;
                sxx += kt * a * a;
                syy += kt * b * b;
                sxy += kt * a * b;
            }
            const std::size_t o = static_cast<std::size_t>(yy) * ow + xx;
            hx[o] = sx;
            hy[o] = sy;
            hxx[o] = sxx;
            hyy[o] = syy;
            hxy[o] = sxy;
        }
    }

    long double total = 0.0L;
    for (int yy = 0; yy < oh; ++yy) {
        for (int xx = 0; xx < ow; ++xx) {
            double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
            for (int t = 0; t < kWindow; ++t) {
                const std::size_t o = static_cast<std::size_t>(yy + t) * ow + xx;
                const double kt = k[static_cast<std::size_t>(t)];
                mx += kt * hx[o];
                my += kt * hy[o];
                mxx += kt * hxx[o];
                myy += kt * hyy[o];
                mxy += kt * hxy[o];
            }
            const double vx = mxx - mx * mx;
            const double vy = myy - my * my;
            const double cov = mxy - mx * my;
            const double num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
            const double den = (mx * mx + my * my + c1) * (vx + vy + c2);
            total += static_cast<long double>(num / den);
        }
    }
    return static_cast<double>(total / static_cast<long double>(oh) /
                               static_cast<long double>(ow));
}

QualityScore score_sequence(const std::vector<Frame>& reference,
                            const std::vector<Frame>& test) {
    if (reference.size() != test.size()) throw ShapeError("score_sequence: frame count differs");
    if (reference.empty()) throw ShapeError("score_sequence: no frames");
    QualityScore s;
    long double ap = 0.0L, as = 0.0L;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double p = psnr(reference[i], test[i]);
        const double m = ssim(reference[i], test[i]);
        s.psnr_db.push_back(p);
        s.ssim.push_back(m);
        ap += p;
        as += m;
    }
    s.mean_psnr = static_cast<double>(ap / static_cast<long double>(reference.size()));
    s.mean_ssim = static_cast<double>(as / static_cast<long double>(reference.size()));
    return s;
}

void write_scores_csv(const std::string& path, const QualityScore& score) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open scores csv for writing: " + path);
    out << "frame_index,psnr_db,ssim\n";
    out.precision(10);
    for (std::size_t i = 0; i < score.psnr_db.size(); ++i) {
        out << i << "," << score.psnr_db[i] << "," << score.ssim[i] << "\n";
    }
}

std::string scores_json(const QualityScore& score) {
    std::ostringstream os;
    os.precision(10);
    os << "{\"frames\": " << score.psnr_db.size() << ", \"mean_psnr_db\": " << score.mean_psnr
       << ", \"mean_ssim\": " << score.mean_ssim << "}";
    return os.str();
}

}  // namespace brs

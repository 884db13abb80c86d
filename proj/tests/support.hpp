#pragma once

// shared fixture helpers for the test binaries

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "umc/mesh.hpp"

namespace testsup {

inline std::filesystem::path temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() /
               ("umc_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

// Axis-aligned closed box, CCW outward normals.
inline umc::TriangleMesh box_mesh(double x0, double y0, double x1, double y1,
                                  double height, double z0 = 0.0) {
    umc::TriangleMesh m;
    double z1 = z0 + height;
    auto v = [&](double x, double y, double z) {
        m.vertices.push_back({x, y, z});
        return static_cast<uint32_t>(m.vertices.size() - 1);
    };
    uint32_t a = v(x0, y0, z0), b = v(x1, y0, z0), c = v(x1, y1, z0), d = v(x0, y1, z0);
    uint32_t e = v(x0, y0, z1), f = v(x1, y0, z1), g = v(x1, y1, z1), h = v(x0, y1, z1);
    auto quad = [&](uint32_t p, uint32_t q, uint32_t r, uint32_t s) {
        m.triangles.push_back({p, q, r});
        m.triangles.push_back({p, r, s});
    };
    quad(a, d, c, b);  // bottom (normal -z)
    quad(e, f, g, h);  // top (+z)
    quad(a, b, f, e);  // south (-y)
    quad(b, c, g, f);  // east (+x)
    quad(c, d, h, g);  // north (+y)
    quad(d, a, e, h);  // west (-x)
    return m;
}

inline void write_box_stl(const std::filesystem::path& path, double x0, double y0,
                          double x1, double y1, double height) {
    umc::write_stl_binary(box_mesh(x0, y0, x1, y1, height), path.string());
}

struct EpwHour {
    int month, day, hour;  // hour 1-24 EPW convention
    double t_air, rh, ghi, dni, dhi, wind_dir, wind_speed;
};

// Minimal EPW with the IWEC column layout; one row per entry.
inline void write_epw(const std::filesystem::path& path,
                      const std::vector<EpwHour>& hours, double lat = 1.37,
                      double lon = 103.98, double tz = 8.0, double alt = 16.0) {
    std::ofstream out(path);
    out << "LOCATION,SINGAPORE,-,SGP,IWEC Data,486980,"
        << lat << "," << lon << "," << tz << "," << alt << "\n";
    out << "DESIGN CONDITIONS,0\n";
    out << "TYPICAL/EXTREME PERIODS,0\n";
    out << "GROUND TEMPERATURES,0\n";
    out << "HOLIDAYS/DAYLIGHT SAVINGS,No,0,0,0\n";
    out << "COMMENTS 1,synthetic fixture\n";
    out << "COMMENTS 2,-\n";
    out << "DATA PERIODS,1,1,Data,Sunday,1/1,12/31\n";
    for (const auto& h : hours) {
        std::vector<std::string> cols(35, "0");
        cols[0] = "1987";
        cols[1] = std::to_string(h.month);
        cols[2] = std::to_string(h.day);
        cols[3] = std::to_string(h.hour);
        cols[4] = "0";
        cols[5] = "_";
        char buf[32];
        auto put = [&](int i, double v) {
            std::snprintf(buf, sizeof(buf), "%g", v);
            cols[i] = buf;
        };
        put(6, h.t_air);
        put(7, h.t_air - 2.0);  // dew point, unused
        put(8, h.rh);
        put(9, 101325);
        put(10, 0);  // extraterrestrial horizontal
        put(11, 0);
        put(12, 0);  // horizontal IR
        put(13, h.ghi);
        put(14, h.dni);
        put(15, h.dhi);
        put(16, 0);
        put(17, 0);
        put(18, 0);
        put(19, 0);
        put(20, h.wind_dir);
        put(21, h.wind_speed);
        std::string line;
        for (size_t i = 0; i < cols.size(); ++i) {
            if (i) line += ",";
            line += cols[i];
        }
        out << line << "\n";
    }
}

// Clear-sky April day for the Singapore-like site: sinusoidal temperature,
// strong noon sun, steady easterly wind.
inline std::vector<EpwHour> singapore_april_day(int month = 4, int day = 20) {
    std::vector<EpwHour> hours;
    for (int h = 1; h <= 24; ++h) {
        double lh = h - 0.5;  // hour-centre local time
        double t = 27.5 + 4.0 * std::sin((lh - 9.0) / 24.0 * 2.0 * M_PI);
        double sun = std::max(0.0, std::sin((lh - 7.0) / 12.0 * M_PI));
        EpwHour e{};
        e.month = month;
        e.day = day;
        e.hour = h;
        e.t_air = t;
        e.rh = 78.0 - 10.0 * sun;
        e.dni = (lh > 7.0 && lh < 19.0) ? 650.0 * sun : 0.0;
        e.dhi = (lh > 7.0 && lh < 19.0) ? 120.0 + 130.0 * sun : 0.0;
        e.ghi = e.dhi + e.dni * sun;  // rough; parser prefers dni/dhi anyway
        e.wind_dir = 90.0;
        e.wind_speed = 2.5;
        hours.push_back(e);
    }
    return hours;
}

} // namespace testsup

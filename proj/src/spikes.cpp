#include "ising/spikes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "ising/errors.hpp"

namespace ising {

SpikeTrains parse_spike_file(std::istream& in) {
  SpikeTrains trains;
  std::string line;
  long line_no = 0;
  bool have_header = false;

  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string first;
    if (!(ss >> first)) continue;  // blank line

    if (!have_header) {
      std::string tag;
      if (first != "#" || !(ss >> tag) || tag != "neurons")
        throw ParseError("expected header '# neurons N T_START T_END'", line_no);
      if (!(ss >> trains.neuron_count >> trains.t_start >> trains.t_end))
        throw ParseError("malformed spike file header", line_no);
      if (trains.neuron_count < 1)
        throw ParseError("neuron count must be >= 1", line_no);
      if (!std::isfinite(trains.t_start) || !std::isfinite(trains.t_end) ||
          !(trains.t_end > trains.t_start))
        throw ParseError("recording interval must be finite with t_end > t_start",
                         line_no);
      trains.spike_times.resize(trains.neuron_count);
      have_header = true;
      continue;
    }

    if (first == "#") continue;  // comment

    int neuron;
    double time;
    std::istringstream row(line);
    if (!(row >> neuron >> time))
      throw ParseError("expected 'neuron_index spike_time'", line_no);
    std::string extra;
    if (row >> extra) throw ParseError("trailing tokens on spike line", line_no);
    if (neuron < 0 || neuron >= trains.neuron_count)
      throw ParseError("neuron index out of range", line_no);
    if (!std::isfinite(time) || time < trains.t_start || time > trains.t_end)
      throw ParseError("spike time outside recording interval", line_no);
    trains.spike_times[neuron].push_back(time);
  }

  if (!have_header) throw ParseError("empty spike file: missing header", line_no);
  for (auto& times : trains.spike_times) std::sort(times.begin(), times.end());
  return trains;
}

SpikeTrains parse_spike_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spike file '" + path + "'");
  return parse_spike_file(in);
}

void write_spike_file(const SpikeTrains& trains, std::ostream& out) {
  out << std::setprecision(17) << "# neurons " << trains.neuron_count << ' '
      << trains.t_start << ' ' << trains.t_end << '\n';
  for (int i = 0; i < trains.neuron_count; ++i)
    for (double t : trains.spike_times[i]) out << i << ' ' << t << '\n';
}

void write_spike_file(const SpikeTrains& trains, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  write_spike_file(trains, out);
}

SpinSeries bin_spikes(const SpikeTrains& trains, double tau) {
  if (!(tau > 0.0)) throw ConfigError("bin_spikes: tau must be > 0");
  SpinSeries series;
  series.neuron_count = trains.neuron_count;
  series.bin_width = tau;
  const long bins =
      static_cast<long>(std::floor((trains.t_end - trains.t_start) / tau));
  series.bins.assign(bins, SpinConfiguration(trains.neuron_count, -1));
  for (int i = 0; i < trains.neuron_count; ++i) {
    for (double t : trains.spike_times[i]) {
      const long b = static_cast<long>(std::floor((t - trains.t_start) / tau));
      if (b >= 0 && b < bins) series.bins[b][i] = 1;
    }
  }
  return series;
}

DataStatistics spike_statistics(const SpinSeries& series) {
  SampleSet samples;
  samples.configurations = series.bins;
  return statistics(samples);
}

}  // namespace ising

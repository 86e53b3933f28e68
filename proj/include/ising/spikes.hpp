#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ising/sampler.hpp"

namespace ising {

// Raw spike times per neuron over a recording interval, in seconds.
struct SpikeTrains {
  int neuron_count = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<std::vector<double>> spike_times;  // sorted on load
};

// Binned spin representation: T bins, each a length-N configuration.
struct SpinSeries {
  int neuron_count = 0;
  double bin_width = 0.0;
  std::vector<SpinConfiguration> bins;
};

// Plain-text format: header `# neurons N T_START T_END`, then one
// `neuron_index spike_time` pair per line. Blank lines and further `#`
// comment lines are ignored. Times may arrive unsorted; they are sorted per
// neuron. Malformed lines and out-of-range values raise ParseError with the
// 1-based line number.
SpikeTrains parse_spike_file(std::istream& in);
SpikeTrains parse_spike_file(const std::string& path);
void write_spike_file(const SpikeTrains& trains, std::ostream& out);
void write_spike_file(const SpikeTrains& trains, const std::string& path);

// Half-open bins [t_start + t*tau, t_start + (t+1)*tau): a spike exactly on
// a boundary lands in the later bin. s = +1 iff the bin holds >= 1 spike.
// The trailing partial bin is discarded, so T = floor((t_end - t_start)/tau).
SpinSeries bin_spikes(const SpikeTrains& trains, double tau = 0.001);

// Rows of the series treated as samples; identical code path as
// sampler statistics (D = T).
DataStatistics spike_statistics(const SpinSeries& series);

}  // namespace ising

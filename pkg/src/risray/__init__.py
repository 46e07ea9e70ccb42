"""risray: deterministic ray-tracing coverage simulator with a far-field
programmable-reflecting-panel (RIS) scattering model.

An image-method specular tracer enumerates reflection/transmission paths
in polygonal scenes; a unit-cell scattering model turns a panel into a
cascade of source-panel / panel-receiver path pairs; coverage sweeps,
power delay profiles and free-space scattering patterns build on the two.
"""

__version__ = "0.1.0"

from .chamber import SweepResult, chamber_sweep, extract_lobes
from .channel import (ChannelSample, Pdp, compose_channel,
                      power_delay_profile, total_rx_power)
from .coverage import (AreaSpec, CoverageGrid, CoverageStats, MeanGain,
                       TraceOptions, cdf, channel_at, compute_coverage,
                       coverage_rate, coverage_stats, design_fixed,
                       grid_points, mean_gain)
from .em import (CarrierSpec, complex_permittivity, dbm_from_amplitude,
                 dbm_from_mw, fresnel_coeff, friis_gain, interaction_product,
                 mw_from_dbm, path_amplitude, reflection_response,
                 transmission_factor)
from .raytrace import (MAX_REFLECTION_CAP, Interaction, PropagationPath,
                       ReflectionCapError, line_of_sight, mirror_point,
                       trace_paths)
from .ris import (FarFieldError, FarFieldWarning, RisConfig, RisPanel,
                  design_phases, fraunhofer_distance, omega_entries,
                  pair_directions, ris_cascade, strongest_pair,
                  uc_positions, uc_scattering, uniform_config)
from .scene import (DEFAULT_MATERIALS, FactoryParams, Material, Scene,
                    SceneError, Surface, build_factory, load_scene,
                    load_scene_file, scene_from_dict)

__all__ = [
    "__version__",
    # scene
    "DEFAULT_MATERIALS", "FactoryParams", "Material", "Scene", "SceneError",
    "Surface", "build_factory", "load_scene", "load_scene_file",
    "scene_from_dict",
    # raytrace
    "MAX_REFLECTION_CAP", "Interaction", "PropagationPath",
    "ReflectionCapError", "line_of_sight", "mirror_point", "trace_paths",
    # em
    "CarrierSpec", "complex_permittivity", "dbm_from_amplitude",
    "dbm_from_mw", "fresnel_coeff", "friis_gain", "interaction_product",
    "mw_from_dbm", "path_amplitude", "reflection_response",
    "transmission_factor",
    # ris
    "FarFieldError", "FarFieldWarning", "RisConfig", "RisPanel",
    "design_phases", "fraunhofer_distance", "omega_entries",
    "pair_directions", "ris_cascade", "strongest_pair", "uc_positions",
    "uc_scattering", "uniform_config",
    # channel
    "ChannelSample", "Pdp", "compose_channel", "power_delay_profile",
    "total_rx_power",
    # coverage
    "AreaSpec", "CoverageGrid", "CoverageStats", "MeanGain", "TraceOptions",
    "cdf", "channel_at", "compute_coverage", "coverage_rate",
    "coverage_stats", "design_fixed", "grid_points", "mean_gain",
    # chamber
    "SweepResult", "chamber_sweep", "extract_lobes",
]

"""forcecontact: force-glove contact labels and contacted-object
segmentation pseudolabels for egocentric recordings.

The core chain is sklearn-shaped: a :class:`ForceConditioner` transformer
turns raw 6-channel force arrays into a consolidated signal (NaN marks
excluded samples) and a :class:`ContactLabeler` predicts per-sample contact
states from it, so both compose in a standard ``Pipeline``.  Everything the
command line does is also available as plain functions.
"""

__version__ = "0.1.0"

from .conditioning import (
    ForceConditioner,
    consolidate_geometric_mean,
    exclusion_mask,
    percentile_normalize,
    run_conditioning,
    subtract_baseline_clip,
)
from .filters import gaussian_smooth, hampel_filter, rolling_percentile, rolling_rms
from .geometry import CameraModel, fundamental_from_poses, project, sampson_error, unproject
from .labeling import (
    ContactLabeler,
    ContactSegment,
    ContactState,
    Thresholds,
    contact_fraction,
    label_samples,
    segment_runs,
)
from .pseudolabel import (
    HandObservation,
    MaskProposal,
    PseudolabelResult,
    masked_mean_sampson,
    select_contacted_object,
)
from .session import ConsolidatedSignal, SensorSession
from .sync import (
    ClockModel,
    FrameTimeline,
    fit_clock_from_events,
    fit_clock_xcorr,
    resample_states_to_frames,
    resample_values_to_frames,
)

__all__ = [
    "__version__",
    "CameraModel",
    "ClockModel",
    "ConsolidatedSignal",
    "ContactLabeler",
    "ContactSegment",
    "ContactState",
    "ForceConditioner",
    "FrameTimeline",
    "HandObservation",
    "MaskProposal",
    "PseudolabelResult",
    "SensorSession",
    "Thresholds",
    "consolidate_geometric_mean",
    "contact_fraction",
    "exclusion_mask",
    "fit_clock_from_events",
    "fit_clock_xcorr",
    "fundamental_from_poses",
    "gaussian_smooth",
    "hampel_filter",
    "label_samples",
    "masked_mean_sampson",
    "percentile_normalize",
    "project",
    "resample_states_to_frames",
    "resample_values_to_frames",
    "rolling_percentile",
    "rolling_rms",
    "run_conditioning",
    "sampson_error",
    "segment_runs",
    "select_contacted_object",
    "subtract_baseline_clip",
    "unproject",
]

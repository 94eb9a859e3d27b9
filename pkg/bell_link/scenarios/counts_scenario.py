import logging
import os

from bell_link.data_classes import SettingPair
from bell_link.topology import sample_events, read_event_stream, write_event_stream
from bell_link.utils.config_loader import RunConfig
from bell_link.scenarios.scenario_common import (
    ScenarioResult,
    count_stream,
    count_record,
    to_builtin,
)

logger = logging.getLogger(__name__)

EVENTS_FILE = "events.txt"


def scenario_counts(run: RunConfig, out_dir: str = None) -> ScenarioResult:
    """Count one stream at the (a, b) settings, sampled or read from counts.input."""
    counts = run.counts
    settings = run.settings.settings_for(SettingPair.A_B)
    source_file = counts.get("input", None)
    if source_file:
        stream, stream_hash = read_event_stream(source_file)
        if stream_hash and stream_hash != run.config_hash():
            logger.warning(f"{source_file} was written by config {stream_hash[:12]}...")
    else:
        stream = sample_events(
            run.topology,
            run.source,
            run.model,
            settings,
            float(counts.duration),
            run.seed,
        )
        if bool(counts.write_events) and out_dir is not None:
            write_event_stream(os.path.join(out_dir, EVENTS_FILE), stream, run.config_hash())

    raw, net, estimate = count_stream(stream, run)
    results = {
        "n_events": len(stream),
        "duration": stream.duration,
        "input": source_file,
        "raw": raw.to_dict(),
        "net": net.to_dict(),
        "correlation": raw.correlation() if raw.total > 0 else None,
        "accidental_method": estimate.method.name,
        "accidental_rates": estimate.rates,
    }
    record = count_record("A_B", settings, raw, net, estimate)
    return ScenarioResult(results=to_builtin(results), tables={"counts": [record]})

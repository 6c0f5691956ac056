from .validation import check_labels, check_recordings, check_segments

__all__ = ["check_labels", "check_recordings", "check_segments"]

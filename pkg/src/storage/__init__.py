from src.storage.results import RunStore, RunRecord

__all__ = ["RunStore", "RunRecord"]

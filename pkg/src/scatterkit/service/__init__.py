from scatterkit.service.app import create_app
from scatterkit.service.jobs import JobManager, JobSnapshot, JobStatus

__all__ = ["JobManager", "JobSnapshot", "JobStatus", "create_app"]

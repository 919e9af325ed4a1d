import json
import logging
from datetime import datetime, timezone

AUDIT_LOG_FIELDS = ('timestamp', 'level', 'step', 'event', 'message', 'details')


class RunAuditHandler(logging.Handler):
    """Append one JSON document per log record to a JSON-lines file."""

    def __init__(self, path, fields=AUDIT_LOG_FIELDS):
        logging.Handler.__init__(self)
        self.path = str(path)
        self.fields = fields
        self.stream = None

    def build_doc(self, record):
        values = {
            "timestamp": datetime.fromtimestamp(record.created, tz=timezone.utc).isoformat(),
            "level": record.levelname,
            "step": getattr(record, "step", None),
            "event": getattr(record, "event", None),
            "message": record.getMessage(),
            "details": getattr(record, "details", None),
        }
        return {name: values[name] for name in self.fields}

    def emit(self, record):
        try:
            if self.stream is None:
                self.stream = open(self.path, 'a', encoding='utf-8')
            self.stream.write(json.dumps(self.build_doc(record), default=str) + '\n')
            self.stream.flush()
        except Exception:
            self.handleError(record)

    def close(self):
        self.acquire()
        try:
            if self.stream is not None:
                self.stream.close()
                self.stream = None
        finally:
            self.release()
        logging.Handler.close(self)

import type { MappingExport } from "./mapping";
import type { DemoPayload, SessionPayload } from "./types";

// Every exported demo carries the canvas-to-task mapping it was
// captured under, so a recording never loses its coordinate frame.

export interface ExportedDemo extends DemoPayload {
  mapping: MappingExport;
}

export interface SessionExport {
  session_id: string;
  version: number;
  mapping: MappingExport;
  demos: ExportedDemo[];
}

export function exportSession(
  session: SessionPayload,
  mapping: MappingExport,
): SessionExport {
  const demos = [...session.demos.successes, ...session.demos.failures]
    .map((d) => ({ ...d, mapping }));
  return {
    session_id: session.session_id,
    version: session.version,
    mapping,
    demos,
  };
}

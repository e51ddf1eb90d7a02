/**
 * Line-delimited JSON wire protocol: one request line in, exactly one
 * response line out, in order. Responses use a fixed key order so that a
 * conforming adapter's output is byte-identical to the golden transcripts.
 *
 * Malformed request lines are answered with id 0 and a "protocol:"-prefixed
 * message; handler exceptions are answered with the request id and a
 * "handler:"-prefixed message. Blank lines are ignored. Diagnostics must go
 * to stderr only.
 */

import { createInterface } from 'readline';

export type Task = 'classification' | 'detection';

export interface Request {
  id: number;
  imagePath: string;
  task: Task;
}

export type ResponsePayload =
  | { status: 'ok'; label: string }
  | { status: 'ok'; detections: Array<{ label: string; score: number; bbox: [number, number, number, number] }> }
  | { status: 'err'; message: string };

/** Maps (imagePath, task) to a payload; exceptions become handler errors. */
export type Handler = (imagePath: string, task: Task) => ResponsePayload;

export class RequestError extends Error {
  constructor(message: string, public readonly reqId: number = 0) {
    super(message);
  }
}

export function parseRequest(line: string): Request {
  let parsed: unknown;
  try {
    parsed = JSON.parse(line);
  } catch {
    throw new RequestError('invalid request');
  }
  if (typeof parsed !== 'object' || parsed === null || Array.isArray(parsed)) {
    throw new RequestError('invalid request');
  }
  const obj = parsed as Record<string, unknown>;
  const id = obj.id;
  if (typeof id !== 'number' || !Number.isInteger(id) || id < 0) {
    throw new RequestError('invalid request');
  }
  if (typeof obj.image_path !== 'string') {
    throw new RequestError('missing image_path', id);
  }
  if (obj.task !== 'classification' && obj.task !== 'detection') {
    throw new RequestError('missing or unknown task', id);
  }
  return { id, imagePath: obj.image_path, task: obj.task };
}

export function formatResponse(id: number, payload: ResponsePayload): string {
  if (payload.status === 'ok') {
    if ('label' in payload) {
      return JSON.stringify({ id, status: 'ok', label: payload.label });
    }
    return JSON.stringify({ id, status: 'ok', detections: payload.detections });
  }
  return JSON.stringify({ id, status: 'err', message: payload.message });
}

export function handleLine(handler: Handler, line: string): string | null {
  if (line.trim() === '') {
    return null;
  }
  let request: Request;
  try {
    request = parseRequest(line);
  } catch (err) {
    const reqId = err instanceof RequestError ? err.reqId : 0;
    return formatResponse(reqId, { status: 'err', message: `protocol: ${(err as Error).message}` });
  }
  try {
    return formatResponse(request.id, handler(request.imagePath, request.task));
  } catch (err) {
    const message = err instanceof Error ? err.message : String(err);
    return formatResponse(request.id, { status: 'err', message: `handler: ${message}` });
  }
}

/** Runs the adapter loop until stdin closes; exits 0 on clean close. */
export function serve(handler: Handler): void {
  const rl = createInterface({ input: process.stdin, terminal: false });
  rl.on('line', (line) => {
    const response = handleLine(handler, line);
    if (response !== null) {
      process.stdout.write(response + '\n');
    }
  });
}

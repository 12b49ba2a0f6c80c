/**
 * Ground-truth oracle for differential regex testing.
 *
 * Protocol: JSON lines over stdin/stdout; one request per line, one response
 * per line, in request order, UTF-8. A request names a pattern, a flag string,
 * an input string, and a lastIndex; the response reports the host RegExp's
 * exec result with capture positions.
 *
 * The oracle adds no interpretation of its own. Two flags are added
 * internally: 'd' so exec reports indices, and 'g' (when 'y' is absent) so
 * the host honors lastIndex. Neither changes the semantics of a single exec.
 */

export interface OracleRequest {
  pattern: string;
  flags?: string;
  input: string;
  lastIndex?: number;
}

export interface CaptureIndices {
  start: number;
  end: number;
}

export interface OracleMatchResponse {
  status: 'ok';
  matched: boolean;
  index?: number;
  endIndex?: number;
  captures?: Array<CaptureIndices | null>;
  named?: Record<string, CaptureIndices | null>;
}

export interface OracleErrorResponse {
  status: 'error';
  message: string;
}

export type OracleResponse = OracleMatchResponse | OracleErrorResponse;

function hostFlags(flags: string): string {
  let out = flags;
  if (!out.includes('d')) out += 'd';
  if (!out.includes('y') && !out.includes('g')) out += 'g';
  return out;
}

type IndicesArray = Array<[number, number] | undefined> & {
  groups?: Record<string, [number, number] | undefined>;
};

export function evaluateRequest(req: OracleRequest): OracleResponse {
  try {
    if (typeof req.pattern !== 'string' || typeof req.input !== 'string') {
      return { status: 'error', message: 'pattern and input must be strings' };
    }
    const re = new RegExp(req.pattern, hostFlags(req.flags ?? ''));
    re.lastIndex = req.lastIndex ?? 0;
    const m = re.exec(req.input);
    if (m === null) {
      return { status: 'ok', matched: false };
    }
    const indices = (m as RegExpExecArray & { indices: IndicesArray }).indices;
    const captures = indices
      .slice(1)
      .map((pair) => (pair ? { start: pair[0], end: pair[1] } : null));
    const named: Record<string, CaptureIndices | null> = {};
    if (indices.groups) {
      for (const [name, pair] of Object.entries(indices.groups)) {
        named[name] = pair ? { start: pair[0], end: pair[1] } : null;
      }
    }
    return {
      status: 'ok',
      matched: true,
      index: m.index,
      endIndex: indices[0]![1],
      captures,
      named,
    };
  } catch (err) {
    return { status: 'error', message: String(err) };
  }
}

export function handleLine(line: string): OracleResponse {
  let req: OracleRequest;
  try {
    req = JSON.parse(line) as OracleRequest;
  } catch (err) {
    return { status: 'error', message: `bad request line: ${String(err)}` };
  }
  return evaluateRequest(req);
}

/** Thin typed adapter over fetch for the platform's JSON API. */

export interface ApiEnvelopeError {
  code: string;
  message: string;
  http_status: number;
}

export type Envelope<T> =
  | { ok: true; data: T }
  | { ok: false; error: ApiEnvelopeError };

export class ApiError extends Error {
  readonly code: string;
  readonly httpStatus: number;

  constructor(error: ApiEnvelopeError) {
    super(error.message);
    this.name = "ApiError";
    this.code = error.code;
    this.httpStatus = error.http_status;
  }
}

export interface Profile {
  am?: number;
  id?: number;
  kind: "user" | "admin";
  name: string;
  surname: string;
  username: string;
  email: string;
  department: string;
}

export interface Lecture {
  id: number;
  title: string;
}

export interface LectureFile {
  id: number;
  name: string;
  media_type: string;
  size: number;
}

export interface PresentedOption {
  text: string;
}

export interface PresentedQuestion {
  id: number;
  kind: "multiple_choice" | "gap_fill";
  question: string;
  options?: string[];
}

export interface Sitting {
  instance_id: string;
  kind: string;
  opened_at: string;
  deadline: string;
  questions: PresentedQuestion[];
}

export interface SubmittedAnswer {
  question_id: number;
  kind: string;
  response: string;
}

export interface GradeReport {
  instance_id: string;
  kind: string;
  date: string;
  correct: number;
  total: number;
  percent: number;
}

export interface ScheduleEntry {
  kind: string;
  date: string;
  time: string;
  duration_minutes: number;
}

export interface ResultRow {
  kind: string;
  date: string;
  percent: number;
  am?: number;
}

export interface ChatMessage {
  id: number;
  sender_name: string;
  body: string;
  sent_at: string;
}

export interface Registration {
  am: number;
  name: string;
  surname: string;
  username: string;
  email: string;
  department: string;
  submitted_at: string;
}

export interface Page<T> {
  items: T[];
  total: number;
  page: number;
  page_size: number;
}

export interface ApiClientOptions {
  baseUrl?: string;
  getToken?: () => string | null;
  onUnauthorized?: () => void;
  fetchImpl?: typeof fetch;
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly getToken: () => string | null;
  private readonly onUnauthorized: () => void;
  private readonly fetchImpl: typeof fetch;

  constructor(options: ApiClientOptions = {}) {
    this.baseUrl = options.baseUrl ?? "";
    this.getToken = options.getToken ?? (() => null);
    this.onUnauthorized = options.onUnauthorized ?? (() => undefined);
    this.fetchImpl = options.fetchImpl ?? fetch.bind(globalThis);
  }

  private headers(json: boolean): Headers {
    const headers = new Headers();
    const token = this.getToken();
    if (token) headers.set("Authorization", `Bearer ${token}`);
    if (json) headers.set("Content-Type", "application/json");
    return headers;
  }

  /** Core request helper; unwraps the response envelope or throws ApiError. */
  async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: this.headers(body !== undefined),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    return this.unwrap<T>(response);
  }

  private async unwrap<T>(response: Response): Promise<T> {
    const envelope = (await response.json()) as Envelope<T>;
    if (envelope.ok) return envelope.data;
    if (envelope.error.http_status === 401) this.onUnauthorized();
    throw new ApiError(envelope.error);
  }

  get<T>(path: string): Promise<T> {
    return this.request<T>("GET", path);
  }

  post<T>(path: string, body?: unknown): Promise<T> {
    return this.request<T>("POST", path, body);
  }

  // -- sessions ---------------------------------------------------------------

  login(username: string, password: string): Promise<{ token: string; kind: string }> {
    return this.post("/api/login", { username, password });
  }

  logout(): Promise<unknown> {
    return this.post("/api/logout", {});
  }

  me(): Promise<Profile> {
    return this.get("/api/me");
  }

  captcha(): Promise<{ token: string; prompt: string }> {
    return this.post("/api/captcha", {});
  }

  // -- content ----------------------------------------------------------------

  lectures(): Promise<Lecture[]> {
    return this.get("/api/lectures");
  }

  lectureFiles(lectureId: number): Promise<LectureFile[]> {
    return this.get(`/api/lectures/${lectureId}/files`);
  }

  /** Download a file as a Blob; this endpoint returns raw bytes, not an envelope. */
  async downloadFile(fileId: number): Promise<{ blob: Blob; filename: string }> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/files/${fileId}`, {
      headers: this.headers(false),
    });
    if (!response.ok) {
      if (response.status === 401) this.onUnauthorized();
      throw new ApiError({
        code: "DOWNLOAD_FAILED",
        message: `download failed with status ${response.status}`,
        http_status: response.status,
      });
    }
    const disposition = response.headers.get("Content-Disposition") ?? "";
    const match = /filename="?([^";]+)"?/.exec(disposition);
    return { blob: await response.blob(), filename: match?.[1] ?? `file-${fileId}` };
  }

  /** Multipart upload: a "meta" JSON part plus the "file" part. */
  async uploadFile(
    lectureId: number,
    file: File,
    mediaType: string,
  ): Promise<LectureFile> {
    const form = new FormData();
    form.append("meta", JSON.stringify({ name: file.name, media_type: mediaType }));
    form.append("file", file);
    const response = await this.fetchImpl(`${this.baseUrl}/api/lectures/${lectureId}/files`, {
      method: "POST",
      headers: this.headers(false),
      body: form,
    });
    return this.unwrap<LectureFile>(response);
  }

  // -- examinations -------------------------------------------------------------

  schedule(): Promise<ScheduleEntry[]> {
    return this.get("/api/schedule");
  }

  startTest(kind: string): Promise<Sitting> {
    return this.post(`/api/tests/${kind}/start`, {});
  }

  openTests(): Promise<Sitting[]> {
    return this.get("/api/tests/open");
  }

  submitTest(instanceId: string, answers: SubmittedAnswer[]): Promise<GradeReport> {
    return this.post(`/api/tests/${instanceId}/submit`, { answers });
  }

  myResults(): Promise<ResultRow[]> {
    return this.get("/api/results/me");
  }

  // -- messaging ----------------------------------------------------------------

  chat(afterId: number): Promise<ChatMessage[]> {
    return this.get(`/api/chat?after_id=${afterId}`);
  }

  postChat(body: string): Promise<ChatMessage> {
    return this.post("/api/chat", { body });
  }
}
